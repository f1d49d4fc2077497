import pytest

from fxlang import countlib as cl
from fxlang import machine as mc
from fxlang.errors import FuelExhausted, StuckError
from fxlang.gen import random_program
from fxlang.parser import parse_program, parse_term
from fxlang.pprint import render_mval
from fxlang.syntax import BOOL, UNIT, complete_handlers, uses_effects


def run(src, sig=None, **kw):
    term = parse_term(src, sig)
    return mc.run_machine(term, sig, **kw)


def test_inject_base_rejects_effect_forms():
    sig = {"Branch": (UNIT, BOOL)}
    term = parse_term("do Branch ()", sig)
    with pytest.raises(StuckError, match="handler machine"):
        mc.inject_base(term)


def test_inject_base_initial_state():
    st = mc.inject_base(parse_term("return 5"))
    assert st.ticks == 0 and st.cont is None and st.env == {}


def test_let_and_retcont_transitions():
    cfg = mc.BaseConfig(parse_term("let x <- return 1 in x + x"), {})
    rule, cfg = mc.step_base(cfg)
    assert rule == "M-Let"
    assert cfg.cont is not None and cfg.cont[1] is None
    rule, cfg = mc.step_base(cfg)
    assert rule == "M-RetCont"
    assert list(cfg.env.values()) == [1] and cfg.cont is None
    rule, cfg = mc.step_base(cfg)
    assert rule == "M-Const"
    rule, final = mc.step_base(cfg)
    assert rule == "final" and final.value == 2


def test_constant_application_single_tick():
    res = run("2 + 3")
    assert res.value == 5 and res.ticks == 1


def test_fast_loop_matches_single_steps():
    # the resumable loop and the stepper must meter identically
    progs = []
    for seed in range(60):
        progs.append(random_program(seed, effects=seed % 2 == 1, refs=seed % 7 == 3))
    term, sig, _ = cl.compose("effcount", "odd", 3)
    progs.append((term, sig))
    for term, sig in progs:
        t2 = complete_handlers(term, sig) if sig else term
        try:
            res = mc.run_machine(t2, None, fuel=20_000)
        except FuelExhausted:
            continue
        if uses_effects(t2):
            cfg = mc.HandlerConfig(t2, {}, mc.identity_cont())
            stepf = mc.step_handler
        else:
            cfg = mc.BaseConfig(t2, {})
            stepf = mc.step_base
        ticks = 0
        while True:
            rule, nxt = stepf(cfg)
            if rule == "final":
                break
            ticks += 1
            cfg = nxt
        assert ticks == res.ticks


def test_deterministic_reports():
    a = cl.run_report("effcount", "odd", 5)
    b = cl.run_report("effcount", "odd", 5)
    assert (a.result, a.ticks, a.envops) == (b.result, b.ticks, b.envops)


def test_multi_shot_resumption_independence():
    src = """
operation Branch : Unit -> Bool
handle (let y <- do Branch () in if y then return 7 else return 9) with {
  val x -> return x;
  Branch () r -> let a <- r true in let b <- r false in return (a, b)
}
"""
    sig, term = parse_program(src)
    res = mc.run_machine(term, sig)
    assert render_mval(res.value) == "(7, 9)"


def test_resumption_capture_shares_structure():
    # the captured resumption must reference the existing pure
    # continuation, not a copy, regardless of its depth
    def check(depth):
        lets = "".join(f"let v{i} <- return {i} in " for i in range(depth))
        src = f"""
operation Branch : Unit -> Bool
handle ({lets} do Branch ()) with {{
  val x -> return 0;
  Branch () r -> return 1
}}
"""
        sig, term = parse_program(src)
        cfg = mc.HandlerConfig(complete_handlers(term, sig), {}, mc.identity_cont())
        while True:
            rule, nxt = mc.step_handler(cfg)
            assert rule != "final"
            if rule == "M-Handle-Op":
                r_val = [v for v in nxt.env.values() if isinstance(v, tuple)]
                assert r_val and r_val[0][0] is cfg.kont[0][0]
                return
            cfg = nxt

    check(2)
    check(40)


def test_envops_of_capture_independent_of_depth():
    def handle_op_envops(depth):
        lets = "".join(f"let v{i} <- return {i} in " for i in range(depth))
        src = f"""
operation Branch : Unit -> Bool
handle ({lets} do Branch ()) with {{
  val x -> return 0;
  Branch () r -> return 1
}}
"""
        sig, term = parse_program(src)
        st = mc.MachineState(complete_handlers(term, sig), {}, mc.identity_cont())
        from fxlang.syntax import Do

        while st.comp.__class__ is not Do:
            before = st.meter.envops
            mc.drive(st, fuel=st.ticks + 1)
        before = st.meter.envops
        mc.drive(st, fuel=st.ticks + 1)
        return st.meter.envops - before

    assert handle_op_envops(2) == handle_op_envops(40)


def test_memoise_evaluates_body_once():
    # the thunk body bumps a reference cell; two forces, one bump
    src = """
letref hits = 0 in
let thunk = (fun (_ : Unit) -> let h <- !hits in let _ <- (hits := h + 1) in return [true]) in
let f = memoise thunk in
let a <- f () in
let b <- f () in
!hits
"""
    res = run(src)
    assert res.value == 1


def test_memoised_second_force_is_one_transition():
    src = """
let f = memoise (fun (_ : Unit) -> return [true]) in
let a <- f () in
f ()
"""
    term = parse_term(src)
    ticks = []
    cfg = mc.BaseConfig(term, {})
    while True:
        rule, nxt = mc.step_base(cfg)
        if rule == "final":
            break
        ticks.append(rule)
        cfg = nxt
    assert ticks.count("M-Memo-Force") == 1
    assert ticks.count("M-Memo-Hit") == 1


def test_memoise_behaves_as_identity_wrap():
    plain = run("let f = (fun (_ : Unit) -> return []) in f ()")
    wrapped = run("let f = memoise (fun (_ : Unit) -> return ([] : List Bool)) in f ()")
    assert render_mval(plain.value) == render_mval(wrapped.value) == "[]"


def test_unhandled_operation_final_state():
    sig = {"Branch": (UNIT, BOOL)}
    res = run("do Branch ()", sig)
    assert isinstance(res.outcome, mc.FinalUnhandledOp)
    assert res.outcome.op == "Branch"


def test_fuel_exhaustion():
    with pytest.raises(FuelExhausted):
        run("(rec (f : Unit -> Bool) u -> f u) ()", fuel=500)


def test_store_threaded_not_captured():
    # a resumption re-invoked later sees the current store contents
    src = """
operation Tick : Unit -> Unit
letref cell = 0 in
handle (let _ <- do Tick () in !cell) with {
  val x -> return x;
  Tick () r -> let _ <- (cell := 5) in let a <- r () in
               let _ <- (cell := 9) in let b <- r () in
               return (a, b)
}
"""
    sig, term = parse_program(src)
    res = mc.run_machine(term, sig)
    assert render_mval(res.value) == "(5, 9)"


def test_trace_run_yields_rule_lines():
    term = parse_term("let x <- return 1 in x + x")
    rules = [rule for _, rule, _, _ in mc.trace_run(term)]
    assert rules == ["M-Let", "M-RetCont", "M-Const"]


def test_trace_classifies_all_pure_rules():
    term = parse_term(
        "let (a, b) = (1, 2) in letref r = a in (r := b); "
        "case [a] {[] -> return 0; h :: t -> !r}"
    )
    rules = set(rule for _, rule, _, _ in mc.trace_run(term))
    assert "stuck" not in rules
    for wanted in ("M-Split", "M-Alloc", "M-Assign", "M-CaseCons", "M-Deref"):
        assert wanted in rules


def test_handler_rules_appear_in_traces():
    term, sig, _ = cl.compose("effcount", "odd", 1)
    rules = [rule for _, rule, _, _ in mc.trace_run(term, sig)]
    for wanted in ("M-Handle", "M-Handle-Op", "M-Resume", "M-RetHandler"):
        assert wanted in rules


def test_composed_pure_counter_runs_on_base_machine():
    term, sig, _ = cl.compose("naivecount", "odd", 2)
    st = mc.inject_base(term)  # a pure program: valid initial config
    assert mc.drive_base(st, fuel=10**6) == "value"
    assert st.out_value == 2

from random import Random

import pytest

from fxlang import countlib as cl
from fxlang import machine as mc
from fxlang import trees as tr
from fxlang.errors import FuelExhausted
from fxlang.parser import parse_term
from fxlang.pprint import render_mval
from fxlang.smallstep import evaluate, NormalValue
from fxlang.syntax import App


def mrun(term, sig=None, fuel=10**7):
    return mc.run_machine(term, sig, fuel)


def test_points_denote_their_vectors():
    from fxlang.syntax import Num

    q0 = cl.as_value(cl.get("q0").term())
    q1 = cl.as_value(cl.get("q1").term())
    for k in range(4):
        assert mc.mval_to_bool(mrun(App(q0, Num(k))).value)
    # q1 is <true, false, false, ...>
    assert mc.mval_to_bool(mrun(App(q1, Num(0))).value) is True
    for k in (1, 2, 5):
        assert mc.mval_to_bool(mrun(App(q1, Num(k))).value) is False


def test_q2_diverges_beyond_index_one():
    from fxlang.syntax import Num

    q2 = cl.as_value(cl.get("q2").term())
    assert mc.mval_to_bool(mrun(App(q2, Num(0))).value) is True
    assert mc.mval_to_bool(mrun(App(q2, Num(1))).value) is False
    with pytest.raises(FuelExhausted):
        mrun(App(q2, Num(2)), fuel=10_000)


def test_odd_on_example_points():
    odd2, _ = cl.build_predicate("odd", 2)
    for point_name, want in (("q0", False), ("q1", True), ("q2", True)):
        pt = cl.as_value(cl.get(point_name).term())
        res = mrun(App(odd2, pt))
        assert mc.mval_to_bool(res.value) is want


def test_toss_result():
    term, sig = cl.get("toss").build(None)
    res = mrun(term, sig)
    assert render_mval(res.value) == "[true, false]"


def test_cross_implementation_agreement():
    rng = Random(77)
    counters = ["naivecount", "lazycount", "bergercount",
                "effcount", "effcount_rep", "effcount_miss"]
    for trial in range(12):
        n = rng.randrange(1, 6)
        tree = tr.random_standard_tree(rng, n)
        pred = tr.tree_to_predicate(tree)
        want = tree.brute_force_count(n)
        for impl in counters:
            got = cl.run_on_predicate(impl, pred, n).result
            assert got == want, (impl, n, got, want)
        assert cl.run_on_predicate("effsearch", pred, n).result == want


def test_agreement_on_class_compatible_examples():
    # each counter against the catalogue predicates inside its class
    cases = {
        "I0": (2, 2), "I1": (1, 1), "T0": (2, 4), "T1": (2, 4),
        "I2": (1, 1), "T2": (2, 4), "constfalse": (3, 0), "odd": (4, 8),
    }
    for pred_name, (n, want) in cases.items():
        pred = cl.get(pred_name)
        for impl_name in ("naivecount", "lazycount", "bergercount",
                          "effcount", "effcount_rep", "effcount_miss"):
            impl = cl.get(impl_name)
            if not cl.class_within(pred.class_at(n), impl.accepts):
                continue
            got = cl.run_report(impl_name, pred_name, n).result
            assert got == want, (impl_name, pred_name, got, want)


def test_effcount_handler_shape_is_pinned():
    # The exact-step formula depends on this clause structure: any edit
    # that adds or removes a transition must show up here first.
    from fxlang.syntax import App, Case, Const, Do, Handle, Lam, Let, Pair, Return, Var

    term = cl.as_value(cl.get("effcount").term())
    assert isinstance(term, Lam)
    body = term.body
    assert isinstance(body, Handle)
    assert isinstance(body.body, App) and isinstance(body.body.arg, Lam)
    assert isinstance(body.body.arg.body, Do)
    h = body.handler
    assert isinstance(h.val_body, Case)
    assert isinstance(h.val_body.left, Return) and h.val_body.left.value.value == 1
    p, r, clause = h.clauses["Branch"]
    assert isinstance(clause, Let) and isinstance(clause.bound, App)
    assert clause.bound.fn.name == r
    inner = clause.body
    assert isinstance(inner, Let) and isinstance(inner.bound, App)
    add = inner.body
    assert isinstance(add, App) and isinstance(add.fn, Const) and add.fn.name == "+"
    assert isinstance(add.arg, Pair)
    assert {add.arg.fst.name, add.arg.snd.name} == {clause.name, inner.name}


def test_effcount_on_constant_true():
    # one empty point satisfies the constant-true predicate
    assert cl.run_report("effcount", "T0", 0).result == 1


def test_naivecount_on_constant_true():
    assert cl.run_report("naivecount", "T0", 3).result == 8


def test_bestshot_returns_satisfying_point():
    # evaluate the chosen point at every index, then check it satisfies
    pred, bits = cl.build_predicate("odd", 2)
    counter, _ = cl.get("bestshot").build(2)
    res = mrun(App(cl.as_value(counter), pred))
    point_v = res.value
    from fxlang.syntax import Num, Quote

    values = []
    for i in range(2):
        out = mrun(App(Quote(point_v), Num(i)))
        values.append(mc.mval_to_bool(out.value))
    assert values.count(True) % 2 == 1  # an odd-parity point


def test_bestshot_is_cheap_until_sampled():
    pred, _ = cl.build_predicate("odd", 8)
    counter, _ = cl.get("bestshot").build(8)
    res = mrun(App(cl.as_value(counter), pred))
    assert res.ticks < 40  # no search yet


def test_lazycount_on_false_constant_time():
    ticks = {cl.run_report("lazycount", "constfalse", n).ticks for n in range(2, 13)}
    assert len(ticks) == 1


def test_hughes_list_append_law():
    # toConsList (concat f g) equals toConsList f ++ toConsList g
    rng = Random(99)
    for _ in range(100):
        xs = [rng.randrange(10) for _ in range(rng.randrange(4))]
        ys = [rng.randrange(10) for _ in range(rng.randrange(4))]
        fx = "".join(f"{v} :: " for v in xs)
        gy = "".join(f"{v} :: " for v in ys)
        src = f"""
let f = (fun (l : List Nat) -> return ({fx}l)) in
let g = (fun (l : List Nat) -> return ({gy}l)) in
let cat = (fun (l : List Nat) -> let t <- g l in f t) in
cat ([] : List Nat)
"""
        res = mrun(parse_term(src))
        got = [v for v in mc.mval_list(res.value)]
        assert got == xs + ys


def test_searcher_points_total_on_standard_predicates():
    term, sig, _ = cl.compose("effsearch", "odd", 3)
    res = mrun(term, sig)
    points = mc.mval_list(res.value)
    assert len(points) == 4
    from fxlang.syntax import Num, Quote

    for pv in points:
        bits = [
            mc.mval_to_bool(mrun(App(Quote(pv), Num(i))).value) for i in range(3)
        ]
        assert sum(bits) % 2 == 1


def test_queens_eager_tree_is_full():
    pred, bits = cl.build_predicate("queens_eager", 2)
    tree = tr.extract_tree(pred, fuel=10**7)
    assert bits == 4
    assert tree.classify(4) is tr.Classification.N_STANDARD
    assert len(tree.leaves()) == 16


def test_queens_counts_match_between_variants():
    for n in (1, 2, 3):
        fail = cl.run_report("effcount_miss", "queens", n).result
        eager = cl.run_report("effcount", "queens_eager", n).result
        assert fail == eager


def test_lint_rejects_branch_handling_predicate():
    sig = {"Branch": (cl.get("effcount").sig()["Branch"])}
    pred = parse_term(
        """
fun (q : Nat -> Bool) ->
  handle q 0 with {val x -> return x; Branch () r -> r true}
""",
        cl.get("effcount").sig(),
    )
    with pytest.raises(cl.LintError):
        cl.run_on_predicate("effcount", pred, 1)


def test_compose_builds_runnable_closed_terms():
    term, sig, bits = cl.compose("effcount", "odd", 3)
    from fxlang.syntax import free_vars
    from fxlang.typecheck import typecheck_program

    assert not free_vars(term)
    assert bits == 3
    typecheck_program(sig, term)


def test_counter_results_match_smallstep():
    # Def 5.8(ii): counting verified through both semantics
    for impl, pred, n, want in (
        ("effcount", "odd", 2, 2),
        ("naivecount", "odd", 2, 2),
        ("effcount_rep", "I2", 1, 1),
        ("effcount_miss", "I0", 2, 2),
    ):
        term, sig, _ = cl.compose(impl, pred, n)
        res = mrun(term, sig)
        out, _, _ = evaluate(term, sig, fuel=10**6)
        assert isinstance(out, NormalValue)
        assert res.value == out.value.value == want

"""Instrumented CEK abstract machines.

Two machines share this module:

  * the base machine for pure terms, whose continuation is a stack of
    let-frames;
  * the handler machine, whose continuation is a stack of resumptions,
    each pairing a pure continuation with a handler closure.

Both are metered.  ``ticks`` counts fired transition rules, exactly one
per rule; interpreting a value term into a machine value never ticks.
``envops`` counts environment lookups and single-binding extensions.
Every data structure a resumption captures is persistent (environments
copy on extension, continuations are linked tuples), so capturing the
topmost resumption is O(1) and captured continuations can be re-invoked
any number of times.

The store and the memo table are deliberately *not* persistent: they are
threaded through a run, so re-invoking a resumption sees the current
cell contents (ML-style references).

Three extensions beyond the pure rules, one tick each:
reference-cell allocate/read/write, and forcing a memoised thunk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fxlang.errors import FuelExhausted, StuckError
from fxlang.syntax import (
    App,
    Assign,
    Case,
    CaseList,
    Cons,
    Const,
    Deref,
    Do,
    Handle,
    Handler,
    Inl,
    Inr,
    Lam,
    Let,
    LetRef,
    Loc,
    Nil,
    Num,
    Pair,
    Quote,
    Rec,
    Return,
    Signature,
    Split,
    Term,
    UNIT_V,
    UnitVal,
    Var,
    complete_handlers,
    uses_effects,
)

DEFAULT_FUEL = 10**8


# ---------------------------------------------------------------------------
# Machine values
# ---------------------------------------------------------------------------
#
# Numerals are plain ints; constants are the Const term itself; a
# resumption is a tuple (pure_cont, handler_closure) so that the
# continuation entry and the first-class value are literally the same
# object.  Pure continuations are linked tuples  None | (frame, rest)
# with frame = (env, name, term); a memo-record frame is (cell_id, None,
# None).  Handler closures are (env, Handler).  Generalised continuations
# are linked tuples  None | (resumption, rest).


class VUnit:
    __slots__ = ()

    def __repr__(self):
        return "()"


VUNIT = VUnit()


class VPair:
    __slots__ = ("fst", "snd")

    def __init__(self, fst, snd):
        self.fst = fst
        self.snd = snd

    def __eq__(self, other):
        return other.__class__ is VPair and self.fst == other.fst and self.snd == other.snd

    def __repr__(self):
        return f"({self.fst!r}, {self.snd!r})"


class VInl:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __eq__(self, other):
        return other.__class__ is VInl and self.value == other.value

    def __repr__(self):
        return "true" if self.value is VUNIT else f"inl {self.value!r}"


class VInr:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __eq__(self, other):
        return other.__class__ is VInr and self.value == other.value

    def __repr__(self):
        return "false" if self.value is VUNIT else f"inr {self.value!r}"


class VNil:
    __slots__ = ()

    def __eq__(self, other):
        return other.__class__ is VNil

    def __repr__(self):
        return "[]"


VNIL = VNil()


class VCons:
    __slots__ = ("head", "tail")

    def __init__(self, head, tail):
        self.head = head
        self.tail = tail

    def __eq__(self, other):
        return other.__class__ is VCons and self.head == other.head and self.tail == other.tail

    def __repr__(self):
        return f"{self.head!r} :: {self.tail!r}"


class VClosure:
    __slots__ = ("env", "term")

    def __init__(self, env, term):
        self.env = env
        self.term = term

    def __repr__(self):
        return "<fun>"


class VRecClosure:
    __slots__ = ("env", "term")

    def __init__(self, env, term):
        self.env = env
        self.term = term

    def __repr__(self):
        return "<rec fun>"


class VLoc:
    __slots__ = ("index",)

    def __init__(self, index):
        self.index = index

    def __eq__(self, other):
        return other.__class__ is VLoc and self.index == other.index

    def __repr__(self):
        return f"<loc {self.index}>"


class VMemo:
    """A memoised thunk: a closure plus a cell in the run's memo table."""

    __slots__ = ("cell", "thunk")

    def __init__(self, cell, thunk):
        self.cell = cell
        self.thunk = thunk

    def __repr__(self):
        return f"<memo {self.cell}>"


class VSentinel:
    """The probe value: a stand-in for a free variable of function type.

    It is never applicable; the machine stopping on an application of it
    is how decision-tree extraction recognises a query.
    """

    __slots__ = ("name",)

    def __init__(self, name="q"):
        self.name = name

    def __repr__(self):
        return f"<probe {self.name}>"


VTRUE = VInl(VUNIT)
VFALSE = VInr(VUNIT)


def mval_to_bool(v) -> bool:
    if v.__class__ is VInl and v.value.__class__ is VUnit:
        return True
    if v.__class__ is VInr and v.value.__class__ is VUnit:
        return False
    raise StuckError(f"expected a boolean machine value, got {v!r}")


def mval_list(v) -> list:
    out = []
    while v.__class__ is VCons:
        out.append(v.head)
        v = v.tail
    if v.__class__ is not VNil:
        raise StuckError("expected a cons-list machine value")
    return out


# The identity handler closure that sits at the bottom of every
# generalised continuation.
ID_HANDLER = Handler("x", Return(Var("x")), {})


def identity_cont():
    """A fresh bottom continuation: one resumption with an empty pure
    continuation and the identity handler closure."""

    return ((None, ({}, ID_HANDLER)), None)


# ---------------------------------------------------------------------------
# Meters and results
# ---------------------------------------------------------------------------


class Meter:
    __slots__ = ("envops",)

    def __init__(self):
        self.envops = 0


@dataclass(slots=True)
class FinalValue:
    value: object  # machine value


@dataclass(slots=True)
class FinalUnhandledOp:
    op: str
    arg: object  # machine value


@dataclass(slots=True)
class RunResult:
    outcome: FinalValue | FinalUnhandledOp
    ticks: int
    envops: int
    store: dict
    loc_counter: int

    @property
    def value(self):
        if isinstance(self.outcome, FinalUnhandledOp):
            raise StuckError(f"unhandled operation {self.outcome.op}")
        return self.outcome.value


@dataclass(slots=True)
class StepReport:
    """One benchmark row: who ran, on what, and what it cost."""

    impl: str
    pred: str
    n: int
    result: object
    ticks: int
    envops: int


# ---------------------------------------------------------------------------
# Value interpretation (tick-free)
# ---------------------------------------------------------------------------


def interp(v: Term, env: dict, meter: Meter):
    cls = v.__class__
    if cls is Var:
        meter.envops += 1
        try:
            return env[v.name]
        except KeyError:
            raise StuckError(f"unbound variable {v.name!r}") from None
    if cls is Num:
        return v.value
    if cls is Quote:
        return v.mval
    if cls is Lam:
        return VClosure(env, v)
    if cls is UnitVal:
        return VUNIT
    if cls is Inl:
        return VInl(interp(v.value, env, meter))
    if cls is Inr:
        return VInr(interp(v.value, env, meter))
    if cls is Pair:
        return VPair(interp(v.fst, env, meter), interp(v.snd, env, meter))
    if cls is Rec:
        return VRecClosure(env, v)
    if cls is Const:
        return v
    if cls is Nil:
        return VNIL
    if cls is Cons:
        return VCons(interp(v.head, env, meter), interp(v.tail, env, meter))
    if cls is Loc:
        return VLoc(v.index)
    raise StuckError(f"not a value term: {v!r}")


def delta_m(name: str, v):
    if v.__class__ is not VPair or v.fst.__class__ is not int or v.snd.__class__ is not int:
        raise StuckError(f"constant {name!r} applied to a non-numeric pair")
    a, b = v.fst, v.snd
    if name == "+":
        return a + b
    if name == "-":
        return a - b if a > b else 0
    if name == "=":
        return VTRUE if a == b else VFALSE
    raise StuckError(f"unknown constant {name!r}")


# ---------------------------------------------------------------------------
# The handler machine (resumable fast loop)
# ---------------------------------------------------------------------------


class MachineState:
    """Mutable machine state, so a run can stop and be resumed.

    The decision-tree extractor stops runs at probe queries, snapshots
    the (persistent) components, and drives multiple futures from one
    stopped state.
    """

    __slots__ = (
        "comp", "env", "kont", "store", "locc", "memo",
        "ticks", "meter", "memo_cells",
        "out_kind", "out_value", "out_op", "out_arg", "out_query",
    )

    def __init__(self, comp, env, kont, store=None, locc=0, memo=None, memo_cells=None):
        self.comp = comp
        self.env = env
        self.kont = kont
        self.store = {} if store is None else store
        self.locc = locc
        self.memo = {} if memo is None else memo
        self.memo_cells = [0] if memo_cells is None else memo_cells
        self.ticks = 0
        self.meter = Meter()
        self.out_kind = None
        self.out_value = None
        self.out_op = None
        self.out_arg = None
        self.out_query = None

    def fork(self, comp):
        """A future of this state with a replaced computation.

        Persistent components are shared; the store and memo table are
        copied so sibling futures cannot interfere.
        """

        st = MachineState(
            comp, self.env, self.kont,
            dict(self.store), self.locc, dict(self.memo), self.memo_cells,
        )
        return st


def drive(st: MachineState, fuel: int, probe=None) -> str:
    """Run the handler machine until a final state, fuel exhaustion, or
    (under a probe) a query on the probe value.

    Returns the outcome kind: 'value', 'op', 'query' or 'fuel', with
    details left on the state.  'op' means an operation reached the
    bottom identity handler: the unhandled-operation final state.
    """

    comp = st.comp
    env = st.env
    kont = st.kont
    store = st.store
    memo = st.memo
    ticks = st.ticks
    meter = st.meter

    def stop(kind):
        st.comp, st.env, st.kont, st.ticks = comp, env, kont, ticks
        st.out_kind = kind
        return kind

    while True:
        cls = comp.__class__

        if cls is Return:
            if kont is None:
                st.out_value = interp(comp.value, env, meter)
                return stop("value")
            rho, rest = kont
            sigma, chi = rho
            if sigma is not None:
                frame, sigtail = sigma
                fname = frame[1]
                if fname is None:  # memo-record frame
                    v = interp(comp.value, env, meter)
                    memo[frame[0]] = v
                    comp = Return(Quote(v))
                    kont = ((sigtail, chi), rest)
                    ticks += 1
                else:  # M-RetCont
                    v = interp(comp.value, env, meter)
                    env = dict(frame[0])
                    env[fname] = v
                    meter.envops += 1
                    comp = frame[2]
                    kont = ((sigtail, chi), rest)
                    ticks += 1
            else:  # M-RetHandler
                if probe is not None and rest is None and chi[1] is ID_HANDLER:
                    # Under a probe we stop at the bottom of the
                    # continuation, before the identity handler fires:
                    # this is the answer-node configuration.
                    st.out_value = interp(comp.value, env, meter)
                    return stop("answer")
                h = chi[1]
                v = interp(comp.value, env, meter)
                env = dict(chi[0])
                env[h.val_name] = v
                meter.envops += 1
                comp = h.val_body
                kont = rest
                ticks += 1

        elif cls is App:
            fv = interp(comp.fn, env, meter)
            fcls = fv.__class__
            if fcls is VClosure:
                av = interp(comp.arg, env, meter)
                lam = fv.term
                env = dict(fv.env)
                env[lam.param] = av
                meter.envops += 1
                comp = lam.body
                ticks += 1
            elif fcls is tuple:  # M-Resume
                comp = Return(comp.arg)
                kont = (fv, kont)
                ticks += 1
            elif fcls is VRecClosure:
                av = interp(comp.arg, env, meter)
                rec = fv.term
                env = dict(fv.env)
                env[rec.fname] = fv
                env[rec.param] = av
                meter.envops += 2
                comp = rec.body
                ticks += 1
            elif fcls is Const:
                av = interp(comp.arg, env, meter)
                if fv.name == "memoise":
                    cell = st.memo_cells[0]
                    st.memo_cells[0] = cell + 1
                    comp = Return(Quote(VMemo(cell, av)))
                else:
                    comp = Return(Quote(delta_m(fv.name, av)))
                ticks += 1
            elif fcls is VMemo:
                cached = memo.get(fv.cell, _ABSENT)
                if cached is not _ABSENT:
                    comp = Return(Quote(cached))
                    ticks += 1
                else:
                    av = interp(comp.arg, env, meter)
                    thunk = fv.thunk
                    if thunk.__class__ is not VClosure:
                        raise StuckError("memoised value is not a closure")
                    rho, rest = kont
                    sigma, chi = rho
                    kont = ((((fv.cell, None, None), sigma), chi), rest)
                    lam = thunk.term
                    env = dict(thunk.env)
                    env[lam.param] = av
                    meter.envops += 1
                    comp = lam.body
                    ticks += 1
            elif fcls is VSentinel:
                if probe is not None and fv is probe:
                    st.out_query = interp(comp.arg, env, meter)
                    return stop("query")
                raise StuckError("application of the probe value outside extraction")
            else:
                raise StuckError(f"application of a non-function: {fv!r}")

        elif cls is Let:
            rho, rest = kont
            sigma, chi = rho
            kont = ((((env, comp.name, comp.body), sigma), chi), rest)
            comp = comp.bound
            ticks += 1

        elif cls is Case:
            sv = interp(comp.scrutinee, env, meter)
            scls = sv.__class__
            if scls is VInl:
                env = dict(env)
                env[comp.left_name] = sv.value
                meter.envops += 1
                comp = comp.left
            elif scls is VInr:
                env = dict(env)
                env[comp.right_name] = sv.value
                meter.envops += 1
                comp = comp.right
            else:
                raise StuckError("case on a non-sum")
            ticks += 1

        elif cls is Do:
            rho, rest = kont
            chi = rho[1]
            clause = chi[1].clauses.get(comp.op)
            if clause is None:
                if rest is None:
                    # Fell through to the identity handler: the
                    # unhandled-operation final state.
                    st.out_op = comp.op
                    st.out_arg = interp(comp.arg, env, meter)
                    return stop("op")
                raise StuckError(
                    f"mid-stack handler lacks a clause for {comp.op!r}; "
                    "handlers must be completed before running"
                )
            p, r, body = clause
            av = interp(comp.arg, env, meter)
            env = dict(chi[0])
            env[p] = av
            env[r] = rho
            meter.envops += 2
            comp = body
            kont = rest
            ticks += 1

        elif cls is Split:
            pv = interp(comp.pair, env, meter)
            if pv.__class__ is not VPair:
                raise StuckError("split of a non-pair")
            env = dict(env)
            env[comp.fst_name] = pv.fst
            env[comp.snd_name] = pv.snd
            meter.envops += 2
            comp = comp.body
            ticks += 1

        elif cls is CaseList:
            sv = interp(comp.scrutinee, env, meter)
            scls = sv.__class__
            if scls is VNil:
                comp = comp.nil_body
            elif scls is VCons:
                env = dict(env)
                env[comp.head_name] = sv.head
                env[comp.tail_name] = sv.tail
                meter.envops += 2
                comp = comp.cons_body
            else:
                raise StuckError("list case on a non-list")
            ticks += 1

        elif cls is Handle:
            kont = ((None, (env, comp.handler)), kont)
            comp = comp.body
            ticks += 1

        elif cls is LetRef:
            store[st.locc] = interp(comp.init, env, meter)
            env = dict(env)
            env[comp.name] = VLoc(st.locc)
            meter.envops += 1
            st.locc += 1
            comp = comp.body
            ticks += 1

        elif cls is Deref:
            rv = interp(comp.ref, env, meter)
            if rv.__class__ is not VLoc:
                raise StuckError("dereference of a non-location")
            comp = Return(Quote(store[rv.index]))
            ticks += 1

        elif cls is Assign:
            rv = interp(comp.ref, env, meter)
            if rv.__class__ is not VLoc:
                raise StuckError("assignment to a non-location")
            store[rv.index] = interp(comp.value, env, meter)
            comp = _RET_UNIT
            ticks += 1

        else:
            raise StuckError(f"no machine rule for {cls.__name__}")

        if ticks >= fuel:
            st.comp, st.env, st.kont, st.ticks = comp, env, kont, ticks
            st.out_kind = "fuel"
            return "fuel"


_ABSENT = object()
_RET_UNIT = Return(UNIT_V)


# ---------------------------------------------------------------------------
# The base machine (pure continuation only)
# ---------------------------------------------------------------------------


class BaseState:
    __slots__ = (
        "comp", "env", "cont", "store", "locc", "memo",
        "ticks", "meter", "memo_cells", "out_kind", "out_value",
    )

    def __init__(self, comp, env, cont=None):
        self.comp = comp
        self.env = env
        self.cont = cont
        self.store = {}
        self.locc = 0
        self.memo = {}
        self.memo_cells = [0]
        self.ticks = 0
        self.meter = Meter()
        self.out_kind = None
        self.out_value = None


def drive_base(st: BaseState, fuel: int) -> str:
    comp = st.comp
    env = st.env
    cont = st.cont
    store = st.store
    memo = st.memo
    ticks = st.ticks
    meter = st.meter

    while True:
        cls = comp.__class__

        if cls is Return:
            if cont is None:
                st.comp, st.env, st.cont, st.ticks = comp, env, cont, ticks
                st.out_value = interp(comp.value, env, meter)
                st.out_kind = "value"
                return "value"
            frame, rest = cont
            fname = frame[1]
            v = interp(comp.value, env, meter)
            if fname is None:  # memo-record frame
                memo[frame[0]] = v
                comp = Return(Quote(v))
                cont = rest
            else:  # M-RetCont
                env = dict(frame[0])
                env[fname] = v
                meter.envops += 1
                comp = frame[2]
                cont = rest
            ticks += 1

        elif cls is App:
            fv = interp(comp.fn, env, meter)
            fcls = fv.__class__
            if fcls is VClosure:
                av = interp(comp.arg, env, meter)
                lam = fv.term
                env = dict(fv.env)
                env[lam.param] = av
                meter.envops += 1
                comp = lam.body
                ticks += 1
            elif fcls is VRecClosure:
                av = interp(comp.arg, env, meter)
                rec = fv.term
                env = dict(fv.env)
                env[rec.fname] = fv
                env[rec.param] = av
                meter.envops += 2
                comp = rec.body
                ticks += 1
            elif fcls is Const:
                av = interp(comp.arg, env, meter)
                if fv.name == "memoise":
                    cell = st.memo_cells[0]
                    st.memo_cells[0] = cell + 1
                    comp = Return(Quote(VMemo(cell, av)))
                else:
                    comp = Return(Quote(delta_m(fv.name, av)))
                ticks += 1
            elif fcls is VMemo:
                cached = memo.get(fv.cell, _ABSENT)
                if cached is not _ABSENT:
                    comp = Return(Quote(cached))
                    ticks += 1
                else:
                    av = interp(comp.arg, env, meter)
                    thunk = fv.thunk
                    if thunk.__class__ is not VClosure:
                        raise StuckError("memoised value is not a closure")
                    cont = ((fv.cell, None, None), cont)
                    lam = thunk.term
                    env = dict(thunk.env)
                    env[lam.param] = av
                    meter.envops += 1
                    comp = lam.body
                    ticks += 1
            else:
                raise StuckError(f"application of a non-function: {fv!r}")

        elif cls is Let:
            cont = ((env, comp.name, comp.body), cont)
            comp = comp.bound
            ticks += 1

        elif cls is Case:
            sv = interp(comp.scrutinee, env, meter)
            scls = sv.__class__
            if scls is VInl:
                env = dict(env)
                env[comp.left_name] = sv.value
                meter.envops += 1
                comp = comp.left
            elif scls is VInr:
                env = dict(env)
                env[comp.right_name] = sv.value
                meter.envops += 1
                comp = comp.right
            else:
                raise StuckError("case on a non-sum")
            ticks += 1

        elif cls is Split:
            pv = interp(comp.pair, env, meter)
            if pv.__class__ is not VPair:
                raise StuckError("split of a non-pair")
            env = dict(env)
            env[comp.fst_name] = pv.fst
            env[comp.snd_name] = pv.snd
            meter.envops += 2
            comp = comp.body
            ticks += 1

        elif cls is CaseList:
            sv = interp(comp.scrutinee, env, meter)
            scls = sv.__class__
            if scls is VNil:
                comp = comp.nil_body
            elif scls is VCons:
                env = dict(env)
                env[comp.head_name] = sv.head
                env[comp.tail_name] = sv.tail
                meter.envops += 2
                comp = comp.cons_body
            else:
                raise StuckError("list case on a non-list")
            ticks += 1

        elif cls is LetRef:
            store[st.locc] = interp(comp.init, env, meter)
            env = dict(env)
            env[comp.name] = VLoc(st.locc)
            meter.envops += 1
            st.locc += 1
            comp = comp.body
            ticks += 1

        elif cls is Deref:
            rv = interp(comp.ref, env, meter)
            if rv.__class__ is not VLoc:
                raise StuckError("dereference of a non-location")
            comp = Return(Quote(store[rv.index]))
            ticks += 1

        elif cls is Assign:
            rv = interp(comp.ref, env, meter)
            if rv.__class__ is not VLoc:
                raise StuckError("assignment to a non-location")
            store[rv.index] = interp(comp.value, env, meter)
            comp = _RET_UNIT
            ticks += 1

        elif cls is Do or cls is Handle:
            raise StuckError("effect form on the base machine")

        else:
            raise StuckError(f"no machine rule for {cls.__name__}")

        if ticks >= fuel:
            st.comp, st.env, st.cont, st.ticks = comp, env, cont, ticks
            st.out_kind = "fuel"
            return "fuel"


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def inject_base(term: Term) -> BaseState:
    """Initial base-machine configuration for a pure closed term."""

    if uses_effects(term):
        raise StuckError("term uses do/handle: run it on the handler machine")
    return BaseState(term, {}, None)


def inject_handler(term: Term) -> MachineState:
    """Initial handler-machine configuration: empty environment over the
    identity continuation."""

    return MachineState(term, {}, identity_cont())


def run_machine(
    term: Term,
    sig: Signature | None = None,
    fuel: int = DEFAULT_FUEL,
    machine: str = "auto",
) -> RunResult:
    """Drive a closed term to a final state on the appropriate machine.

    ``machine`` may be 'base', 'handler' or 'auto' (base exactly when the
    term has no do/handle).  Handlers are completed against the signature
    first.  Raises FuelExhausted if the budget runs out.
    """

    if sig:
        term = complete_handlers(term, sig)
    if machine == "auto":
        machine = "handler" if uses_effects(term) else "base"
    if machine == "base":
        st = inject_base(term)
        kind = drive_base(st, fuel)
        if kind == "fuel":
            raise FuelExhausted(st.ticks)
        return RunResult(FinalValue(st.out_value), st.ticks, st.meter.envops, st.store, st.locc)
    st = inject_handler(term)
    kind = drive(st, fuel)
    if kind == "fuel":
        raise FuelExhausted(st.ticks)
    if kind == "op":
        outcome: FinalValue | FinalUnhandledOp = FinalUnhandledOp(st.out_op, st.out_arg)
    else:
        outcome = FinalValue(st.out_value)
    return RunResult(outcome, st.ticks, st.meter.envops, st.store, st.locc)


def memoise_value(thunk, memo_cells=None):
    """Wrap a closure machine value in a fresh memo cell (the machine
    primitive, exposed for direct use)."""

    if thunk.__class__ is not VClosure:
        raise StuckError("memoise expects a closure")
    cells = memo_cells if memo_cells is not None else [0]
    cell = cells[0]
    cells[0] = cell + 1
    return VMemo(cell, thunk)


# ---------------------------------------------------------------------------
# Single-step functions (slow path: tracing, decompilation tests)
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class HandlerConfig:
    comp: Term
    env: dict
    kont: object
    store: dict = field(default_factory=dict)
    locc: int = 0
    memo: dict = field(default_factory=dict)
    memo_cells: list = field(default_factory=lambda: [0])


@dataclass(slots=True)
class BaseConfig:
    comp: Term
    env: dict
    cont: object = None
    store: dict = field(default_factory=dict)
    locc: int = 0
    memo: dict = field(default_factory=dict)
    memo_cells: list = field(default_factory=lambda: [0])


def step_handler(cfg: HandlerConfig):
    """One handler-machine transition.

    Returns (rule_name, HandlerConfig) or (final_kind, Final...) where
    final_kind is 'value' or 'op'.  The rule names follow the machine
    description: M-App, M-Rec, M-Const, M-Split, M-CaseL, M-CaseR,
    M-CaseNil, M-CaseCons, M-Let, M-RetCont, M-Handle, M-RetHandler,
    M-Handle-Op, M-Resume, M-Alloc, M-Deref, M-Assign, M-Memo,
    M-Memo-Hit, M-Memo-Force, M-Memo-Record.
    """

    st = MachineState(
        cfg.comp, cfg.env, cfg.kont, dict(cfg.store), cfg.locc, dict(cfg.memo), cfg.memo_cells
    )
    rule = _classify_handler_rule(cfg)
    kind = drive(st, fuel=1)
    if kind == "value":
        return "final", FinalValue(st.out_value)
    if kind == "op":
        return "final", FinalUnhandledOp(st.out_op, st.out_arg)
    return rule, HandlerConfig(
        st.comp, st.env, st.kont, st.store, st.locc, st.memo, st.memo_cells
    )


def _classify_handler_rule(cfg: HandlerConfig) -> str:
    comp = cfg.comp
    cls = comp.__class__
    m = Meter()
    if cls is Return:
        if cfg.kont is None:
            return "final"
        (sigma, chi), rest = cfg.kont
        if sigma is not None:
            return "M-Memo-Record" if sigma[0][1] is None else "M-RetCont"
        return "M-RetHandler"
    if cls is App:
        fv = interp(comp.fn, cfg.env, m)
        fcls = fv.__class__
        if fcls is VClosure:
            return "M-App"
        if fcls is tuple:
            return "M-Resume"
        if fcls is VRecClosure:
            return "M-Rec"
        if fcls is Const:
            return "M-Memo" if fv.name == "memoise" else "M-Const"
        if fcls is VMemo:
            return "M-Memo-Hit" if fv.cell in cfg.memo else "M-Memo-Force"
        return "stuck"
    if cls is Let:
        return "M-Let"
    if cls is Split:
        return "M-Split"
    if cls is Case:
        sv = interp(comp.scrutinee, cfg.env, m)
        return "M-CaseL" if sv.__class__ is VInl else "M-CaseR"
    if cls is CaseList:
        sv = interp(comp.scrutinee, cfg.env, m)
        return "M-CaseNil" if sv.__class__ is VNil else "M-CaseCons"
    if cls is Do:
        return "M-Handle-Op"
    if cls is Handle:
        return "M-Handle"
    if cls is LetRef:
        return "M-Alloc"
    if cls is Deref:
        return "M-Deref"
    if cls is Assign:
        return "M-Assign"
    return "stuck"


def step_base(cfg: BaseConfig):
    st = BaseState(cfg.comp, cfg.env, cfg.cont)
    st.store = dict(cfg.store)
    st.locc = cfg.locc
    st.memo = dict(cfg.memo)
    st.memo_cells = cfg.memo_cells
    rule = _classify_base_rule(cfg)
    kind = drive_base(st, fuel=1)
    if kind == "value":
        return "final", FinalValue(st.out_value)
    return rule, BaseConfig(st.comp, st.env, st.cont, st.store, st.locc, st.memo, st.memo_cells)


def _classify_base_rule(cfg: BaseConfig) -> str:
    comp = cfg.comp
    cls = comp.__class__
    m = Meter()
    if cls is Return:
        if cfg.cont is None:
            return "final"
        return "M-Memo-Record" if cfg.cont[0][1] is None else "M-RetCont"
    if cls is App:
        fv = interp(comp.fn, cfg.env, m)
        fcls = fv.__class__
        if fcls is VClosure:
            return "M-App"
        if fcls is VRecClosure:
            return "M-Rec"
        if fcls is Const:
            return "M-Memo" if fv.name == "memoise" else "M-Const"
        if fcls is VMemo:
            return "M-Memo-Hit" if fv.cell in cfg.memo else "M-Memo-Force"
        return "stuck"
    if cls is Let:
        return "M-Let"
    if cls is Split:
        return "M-Split"
    if cls is Case:
        sv = interp(comp.scrutinee, cfg.env, m)
        return "M-CaseL" if sv.__class__ is VInl else "M-CaseR"
    if cls is CaseList:
        sv = interp(comp.scrutinee, cfg.env, m)
        return "M-CaseNil" if sv.__class__ is VNil else "M-CaseCons"
    if cls is LetRef:
        return "M-Alloc"
    if cls is Deref:
        return "M-Deref"
    if cls is Assign:
        return "M-Assign"
    return "stuck"


def kont_depth(kont) -> int:
    d = 0
    while kont is not None:
        d += 1
        kont = kont[1]
    return d


def comp_head(t: Term) -> str:
    return t.__class__.__name__


def trace_run(term: Term, sig: Signature | None = None, fuel: int = 100_000):
    """Step a term transition by transition, yielding
    (tick, rule, head-form, continuation-depth) tuples."""

    if sig:
        term = complete_handlers(term, sig)
    if uses_effects(term):
        cfg = HandlerConfig(term, {}, identity_cont())
        tick = 0
        while tick < fuel:
            rule, nxt = step_handler(cfg)
            if rule == "final":
                return
            tick += 1
            yield tick, rule, comp_head(nxt.comp), kont_depth(nxt.kont)
            cfg = nxt
        raise FuelExhausted(tick)
    bcfg = BaseConfig(term, {})
    tick = 0
    while tick < fuel:
        rule, nxt = step_base(bcfg)
        if rule == "final":
            return
        tick += 1
        yield tick, rule, comp_head(nxt.comp), 0
        bcfg = nxt
    raise FuelExhausted(tick)

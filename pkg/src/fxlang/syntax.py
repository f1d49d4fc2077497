"""Abstract syntax for the fx language family.

Three nested languages share one AST:

  * the pure core: naturals, unit, pairs, sums, cons lists, first-class
    functions, general recursion, and the constants + - = on naturals;
  * the effect extension: operation invocation (``do``) and handlers;
  * the state extension: reference cells (``letref`` / ``!`` / ``:=``).

Terms are fine-grain call-by-value: eliminators only accept value
arguments and every intermediate computation is named by a ``let``.  The
parser (and the program builders in :mod:`fxlang.countlib`) enforce this
shape; the evaluators rely on it.

Booleans are not primitive.  ``Bool`` abbreviates ``Unit + Unit`` with
``true = inl ()`` and ``false = inr ()``; ``if`` is a case split.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


class Type:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class NatType(Type):
    def __str__(self) -> str:
        return "Nat"


@dataclass(frozen=True, slots=True)
class UnitType(Type):
    def __str__(self) -> str:
        return "Unit"


@dataclass(frozen=True, slots=True)
class Arrow(Type):
    dom: Type
    cod: Type

    def __str__(self) -> str:
        dom = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{dom} -> {self.cod}"


@dataclass(frozen=True, slots=True)
class Prod(Type):
    fst: Type
    snd: Type

    def __str__(self) -> str:
        return f"({self.fst} * {self.snd})"


@dataclass(frozen=True, slots=True)
class Sum(Type):
    left: Type
    right: Type

    def __str__(self) -> str:
        if self == BOOL:
            return "Bool"
        return f"({self.left} + {self.right})"


@dataclass(frozen=True, slots=True)
class RefType(Type):
    elem: Type

    def __str__(self) -> str:
        return f"Ref ({self.elem})"


@dataclass(frozen=True, slots=True)
class ListType(Type):
    elem: Type

    def __str__(self) -> str:
        return f"List ({self.elem})"


NAT = NatType()
UNIT = UnitType()
BOOL = Sum(UNIT, UNIT)

POINT = Arrow(NAT, BOOL)
PREDICATE = Arrow(POINT, BOOL)

# Types of the arithmetic constants.  ``=`` lands in the encoded booleans.
CONST_TYPES: dict[str, Type] = {
    "+": Arrow(Prod(NAT, NAT), NAT),
    "-": Arrow(Prod(NAT, NAT), NAT),
    "=": Arrow(Prod(NAT, NAT), BOOL),
}


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        from fxlang import pprint

        return pprint.to_source(self)


# -- value forms


@dataclass(eq=False, repr=False, slots=True)
class Var(Term):
    name: str


@dataclass(eq=False, repr=False, slots=True)
class Num(Term):
    value: int


@dataclass(eq=False, repr=False, slots=True)
class Const(Term):
    name: str  # '+', '-', '=' or the machine primitive 'memoise'


@dataclass(eq=False, repr=False, slots=True)
class UnitVal(Term):
    pass


@dataclass(eq=False, repr=False, slots=True)
class Lam(Term):
    param: str
    body: Term
    param_type: Optional[Type] = None


@dataclass(eq=False, repr=False, slots=True)
class Rec(Term):
    fname: str
    param: str
    body: Term
    fn_type: Optional[Type] = None  # must be an Arrow when checked


@dataclass(eq=False, repr=False, slots=True)
class Pair(Term):
    fst: Term
    snd: Term


@dataclass(eq=False, repr=False, slots=True)
class Inl(Term):
    value: Term
    ann: Optional[Type] = None  # the full sum type, when known


@dataclass(eq=False, repr=False, slots=True)
class Inr(Term):
    value: Term
    ann: Optional[Type] = None


@dataclass(eq=False, repr=False, slots=True)
class Nil(Term):
    ann: Optional[Type] = None  # element type, when known


@dataclass(eq=False, repr=False, slots=True)
class Cons(Term):
    head: Term
    tail: Term


@dataclass(eq=False, repr=False, slots=True)
class Loc(Term):
    """A store location.  Runtime-only: never occurs in source programs."""

    index: int


@dataclass(eq=False, repr=False, slots=True)
class Quote(Term):
    """A machine value lifted back into value-term position.

    Runtime-only.  The machine uses it when a transition must place a
    computed value (a store read, a constant result, a memoised result)
    into the computation component of a configuration.
    """

    mval: object


# -- computation forms


@dataclass(eq=False, repr=False, slots=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(eq=False, repr=False, slots=True)
class Return(Term):
    value: Term


@dataclass(eq=False, repr=False, slots=True)
class Let(Term):
    name: str
    bound: Term
    body: Term


@dataclass(eq=False, repr=False, slots=True)
class Split(Term):
    pair: Term
    fst_name: str
    snd_name: str
    body: Term


@dataclass(eq=False, repr=False, slots=True)
class Case(Term):
    scrutinee: Term
    left_name: str
    left: Term
    right_name: str
    right: Term


@dataclass(eq=False, repr=False, slots=True)
class CaseList(Term):
    scrutinee: Term
    nil_body: Term
    head_name: str
    tail_name: str
    cons_body: Term


@dataclass(eq=False, repr=False, slots=True)
class Do(Term):
    op: str
    arg: Term


@dataclass(eq=False, repr=False, slots=True)
class Handle(Term):
    body: Term
    handler: "Handler"


@dataclass(eq=False, repr=False, slots=True)
class LetRef(Term):
    name: str
    init: Term
    body: Term


@dataclass(eq=False, repr=False, slots=True)
class Deref(Term):
    ref: Term


@dataclass(eq=False, repr=False, slots=True)
class Assign(Term):
    ref: Term
    value: Term


@dataclass(eq=False, repr=False, slots=True)
class Handler:
    """One success clause plus at most one clause per operation symbol."""

    val_name: str
    val_body: Term
    clauses: dict[str, tuple[str, str, Term]] = field(default_factory=dict)


# An effect signature maps operation symbols to (argument, result) types.
Signature = dict[str, tuple[Type, Type]]

EMPTY_SIG: Signature = {}


# Shared literal pieces.  AST nodes are immutable by convention, so sharing
# them across terms is safe.
UNIT_V = UnitVal()


def true_() -> Term:
    return Inl(UNIT_V, BOOL)


def false_() -> Term:
    return Inr(UNIT_V, BOOL)


def bool_(b: bool) -> Term:
    return true_() if b else false_()


VALUE_CLASSES = (Var, Num, Const, UnitVal, Lam, Rec, Pair, Inl, Inr, Nil, Cons, Loc, Quote)


def is_value(t: Term) -> bool:
    return isinstance(t, VALUE_CLASSES)


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------


def free_vars(t: Term) -> set[str]:
    out: set[str] = set()
    _fv(t, out, frozenset())
    return out


def _fv(t: Term, out: set[str], bound: frozenset[str]) -> None:
    cls = t.__class__
    if cls is Var:
        if t.name not in bound:
            out.add(t.name)
    elif cls in (Num, Const, UnitVal, Nil, Loc, Quote):
        pass
    elif cls is Lam:
        _fv(t.body, out, bound | {t.param})
    elif cls is Rec:
        _fv(t.body, out, bound | {t.fname, t.param})
    elif cls is Pair:
        _fv(t.fst, out, bound)
        _fv(t.snd, out, bound)
    elif cls in (Inl, Inr):
        _fv(t.value, out, bound)
    elif cls is Cons:
        _fv(t.head, out, bound)
        _fv(t.tail, out, bound)
    elif cls is App:
        _fv(t.fn, out, bound)
        _fv(t.arg, out, bound)
    elif cls is Return:
        _fv(t.value, out, bound)
    elif cls is Let:
        _fv(t.bound, out, bound)
        _fv(t.body, out, bound | {t.name})
    elif cls is Split:
        _fv(t.pair, out, bound)
        _fv(t.body, out, bound | {t.fst_name, t.snd_name})
    elif cls is Case:
        _fv(t.scrutinee, out, bound)
        _fv(t.left, out, bound | {t.left_name})
        _fv(t.right, out, bound | {t.right_name})
    elif cls is CaseList:
        _fv(t.scrutinee, out, bound)
        _fv(t.nil_body, out, bound)
        _fv(t.cons_body, out, bound | {t.head_name, t.tail_name})
    elif cls is Do:
        _fv(t.arg, out, bound)
    elif cls is Handle:
        _fv(t.body, out, bound)
        h = t.handler
        _fv(h.val_body, out, bound | {h.val_name})
        for op, (p, r, b) in h.clauses.items():
            _fv(b, out, bound | {p, r})
    elif cls is LetRef:
        _fv(t.init, out, bound)
        _fv(t.body, out, bound | {t.name})
    elif cls is Deref:
        _fv(t.ref, out, bound)
    elif cls is Assign:
        _fv(t.ref, out, bound)
        _fv(t.value, out, bound)
    else:  # pragma: no cover
        raise TypeError(f"unknown term node {cls.__name__}")


def alpha_eq(a: Term, b: Term) -> bool:
    """Structural equality up to renaming of bound variables.

    Type annotations are ignored: the surface syntax only records them
    where the checker needs help, so two pipelines may legitimately place
    them differently.
    """

    return _aeq(a, b, {}, {})


def _aeq(a: Term, b: Term, ra: dict[str, str], rb: dict[str, str]) -> bool:
    ca, cb = a.__class__, b.__class__
    if ca is not cb:
        return False
    if ca is Var:
        return ra.get(a.name, a.name) == rb.get(b.name, b.name)
    if ca is Num:
        return a.value == b.value
    if ca is Const:
        return a.name == b.name
    if ca is UnitVal or ca is Nil:
        return True
    if ca is Loc:
        return a.index == b.index
    if ca is Quote:
        return a.mval == b.mval
    if ca is Lam:
        n = f"#{len(ra)}"
        return _aeq(a.body, b.body, {**ra, a.param: n}, {**rb, b.param: n})
    if ca is Rec:
        n1, n2 = f"#{len(ra)}", f"#{len(ra)}'"
        return _aeq(
            a.body,
            b.body,
            {**ra, a.fname: n1, a.param: n2},
            {**rb, b.fname: n1, b.param: n2},
        )
    if ca is Pair:
        return _aeq(a.fst, b.fst, ra, rb) and _aeq(a.snd, b.snd, ra, rb)
    if ca in (Inl, Inr):
        return _aeq(a.value, b.value, ra, rb)
    if ca is Cons:
        return _aeq(a.head, b.head, ra, rb) and _aeq(a.tail, b.tail, ra, rb)
    if ca is App:
        return _aeq(a.fn, b.fn, ra, rb) and _aeq(a.arg, b.arg, ra, rb)
    if ca is Return:
        return _aeq(a.value, b.value, ra, rb)
    if ca is Let:
        if not _aeq(a.bound, b.bound, ra, rb):
            return False
        n = f"#{len(ra)}"
        return _aeq(a.body, b.body, {**ra, a.name: n}, {**rb, b.name: n})
    if ca is Split:
        if not _aeq(a.pair, b.pair, ra, rb):
            return False
        n1, n2 = f"#{len(ra)}", f"#{len(ra)}'"
        return _aeq(
            a.body,
            b.body,
            {**ra, a.fst_name: n1, a.snd_name: n2},
            {**rb, b.fst_name: n1, b.snd_name: n2},
        )
    if ca is Case:
        if not _aeq(a.scrutinee, b.scrutinee, ra, rb):
            return False
        n = f"#{len(ra)}"
        return _aeq(a.left, b.left, {**ra, a.left_name: n}, {**rb, b.left_name: n}) and _aeq(
            a.right, b.right, {**ra, a.right_name: n}, {**rb, b.right_name: n}
        )
    if ca is CaseList:
        if not _aeq(a.scrutinee, b.scrutinee, ra, rb):
            return False
        if not _aeq(a.nil_body, b.nil_body, ra, rb):
            return False
        n1, n2 = f"#{len(ra)}", f"#{len(ra)}'"
        return _aeq(
            a.cons_body,
            b.cons_body,
            {**ra, a.head_name: n1, a.tail_name: n2},
            {**rb, b.head_name: n1, b.tail_name: n2},
        )
    if ca is Do:
        return a.op == b.op and _aeq(a.arg, b.arg, ra, rb)
    if ca is Handle:
        if not _aeq(a.body, b.body, ra, rb):
            return False
        ha, hb = a.handler, b.handler
        if set(ha.clauses) != set(hb.clauses):
            return False
        n = f"#{len(ra)}"
        if not _aeq(ha.val_body, hb.val_body, {**ra, ha.val_name: n}, {**rb, hb.val_name: n}):
            return False
        for op in ha.clauses:
            pa, qa, ba = ha.clauses[op]
            pb, qb, bb = hb.clauses[op]
            n1, n2 = f"#{len(ra)}", f"#{len(ra)}'"
            if not _aeq(ba, bb, {**ra, pa: n1, qa: n2}, {**rb, pb: n1, qb: n2}):
                return False
        return True
    if ca is LetRef:
        if not _aeq(a.init, b.init, ra, rb):
            return False
        n = f"#{len(ra)}"
        return _aeq(a.body, b.body, {**ra, a.name: n}, {**rb, b.name: n})
    if ca is Deref:
        return _aeq(a.ref, b.ref, ra, rb)
    if ca is Assign:
        return _aeq(a.ref, b.ref, ra, rb) and _aeq(a.value, b.value, ra, rb)
    raise TypeError(f"unknown term node {ca.__name__}")  # pragma: no cover


class NameSupply:
    """Hands out identifiers that are unique within one term.

    Reuses the requested base name when it is still free, otherwise
    appends a primed counter (``x``, ``x'1``, ``x'2``, ...).  Primes are
    identifier characters in the surface syntax, so freshened terms stay
    printable and re-parseable.
    """

    __slots__ = ("used", "counts")

    def __init__(self, used: Optional[set[str]] = None) -> None:
        self.used: set[str] = set(used) if used else set()
        self.counts: dict[str, int] = {}

    def fresh(self, base: str) -> str:
        if base not in self.used:
            self.used.add(base)
            return base
        k = self.counts.get(base, 0)
        while True:
            k += 1
            name = f"{base}'{k}"
            if name not in self.used:
                self.counts[base] = k
                self.used.add(name)
                return name


def binder_names(t: Term) -> set[str]:
    out: set[str] = set()
    for s in subterms(t):
        cls = s.__class__
        if cls is Lam:
            out.add(s.param)
        elif cls is Rec:
            out.add(s.fname)
            out.add(s.param)
        elif cls is Let:
            out.add(s.name)
        elif cls is Split:
            out.add(s.fst_name)
            out.add(s.snd_name)
        elif cls is Case:
            out.add(s.left_name)
            out.add(s.right_name)
        elif cls is CaseList:
            out.add(s.head_name)
            out.add(s.tail_name)
        elif cls is Handle:
            out.add(s.handler.val_name)
            for p, r, _ in s.handler.clauses.values():
                out.add(p)
                out.add(r)
        elif cls is LetRef:
            out.add(s.name)
    return out


def freshen(t: Term) -> Term:
    """Rename every binder so binder names are globally unique.

    Substitution and machine environments then never have to worry about
    capture or accidental shadowing.  Free variables keep their names.
    """

    return _freshen(t, {}, NameSupply(free_vars(t)))


def _freshen(t: Term, env: dict[str, str], ns: NameSupply) -> Term:
    cls = t.__class__
    if cls is Var:
        return Var(env.get(t.name, t.name))
    if cls in (Num, Const, UnitVal, Nil, Loc, Quote):
        return t
    if cls is Lam:
        p = ns.fresh(t.param)
        return Lam(p, _freshen(t.body, {**env, t.param: p}, ns), t.param_type)
    if cls is Rec:
        f, p = ns.fresh(t.fname), ns.fresh(t.param)
        return Rec(f, p, _freshen(t.body, {**env, t.fname: f, t.param: p}, ns), t.fn_type)
    if cls is Pair:
        return Pair(_freshen(t.fst, env, ns), _freshen(t.snd, env, ns))
    if cls is Inl:
        return Inl(_freshen(t.value, env, ns), t.ann)
    if cls is Inr:
        return Inr(_freshen(t.value, env, ns), t.ann)
    if cls is Cons:
        return Cons(_freshen(t.head, env, ns), _freshen(t.tail, env, ns))
    if cls is App:
        return App(_freshen(t.fn, env, ns), _freshen(t.arg, env, ns))
    if cls is Return:
        return Return(_freshen(t.value, env, ns))
    if cls is Let:
        x = ns.fresh(t.name)
        return Let(x, _freshen(t.bound, env, ns), _freshen(t.body, {**env, t.name: x}, ns))
    if cls is Split:
        a, b = ns.fresh(t.fst_name), ns.fresh(t.snd_name)
        return Split(
            _freshen(t.pair, env, ns),
            a,
            b,
            _freshen(t.body, {**env, t.fst_name: a, t.snd_name: b}, ns),
        )
    if cls is Case:
        xl, xr = ns.fresh(t.left_name), ns.fresh(t.right_name)
        return Case(
            _freshen(t.scrutinee, env, ns),
            xl,
            _freshen(t.left, {**env, t.left_name: xl}, ns),
            xr,
            _freshen(t.right, {**env, t.right_name: xr}, ns),
        )
    if cls is CaseList:
        h, tl = ns.fresh(t.head_name), ns.fresh(t.tail_name)
        return CaseList(
            _freshen(t.scrutinee, env, ns),
            _freshen(t.nil_body, env, ns),
            h,
            tl,
            _freshen(t.cons_body, {**env, t.head_name: h, t.tail_name: tl}, ns),
        )
    if cls is Do:
        return Do(t.op, _freshen(t.arg, env, ns))
    if cls is Handle:
        h = t.handler
        vx = ns.fresh(h.val_name)
        clauses = {}
        for op, (p, r, b) in h.clauses.items():
            p2, r2 = ns.fresh(p), ns.fresh(r)
            clauses[op] = (p2, r2, _freshen(b, {**env, p: p2, r: r2}, ns))
        return Handle(
            _freshen(t.body, env, ns),
            Handler(vx, _freshen(h.val_body, {**env, h.val_name: vx}, ns), clauses),
        )
    if cls is LetRef:
        x = ns.fresh(t.name)
        return LetRef(x, _freshen(t.init, env, ns), _freshen(t.body, {**env, t.name: x}, ns))
    if cls is Deref:
        return Deref(_freshen(t.ref, env, ns))
    if cls is Assign:
        return Assign(_freshen(t.ref, env, ns), _freshen(t.value, env, ns))
    raise TypeError(f"unknown term node {cls.__name__}")  # pragma: no cover


def subterms(t: Term):
    """Iterate over every node of a term, t itself included."""

    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        cls = s.__class__
        if cls in (Var, Num, Const, UnitVal, Nil, Loc, Quote):
            continue
        if cls is Lam:
            stack.append(s.body)
        elif cls is Rec:
            stack.append(s.body)
        elif cls is Pair:
            stack += (s.fst, s.snd)
        elif cls in (Inl, Inr):
            stack.append(s.value)
        elif cls is Cons:
            stack += (s.head, s.tail)
        elif cls is App:
            stack += (s.fn, s.arg)
        elif cls is Return:
            stack.append(s.value)
        elif cls is Let:
            stack += (s.bound, s.body)
        elif cls is Split:
            stack += (s.pair, s.body)
        elif cls is Case:
            stack += (s.scrutinee, s.left, s.right)
        elif cls is CaseList:
            stack += (s.scrutinee, s.nil_body, s.cons_body)
        elif cls is Do:
            stack.append(s.arg)
        elif cls is Handle:
            stack.append(s.body)
            stack.append(s.handler.val_body)
            for _, (_, _, b) in s.handler.clauses.items():
                stack.append(b)
        elif cls is LetRef:
            stack += (s.init, s.body)
        elif cls is Deref:
            stack.append(s.ref)
        elif cls is Assign:
            stack += (s.ref, s.value)
        else:  # pragma: no cover
            raise TypeError(f"unknown term node {cls.__name__}")


def uses_effects(t: Term) -> bool:
    """Does the term invoke or handle operations anywhere?"""

    for s in subterms(t):
        cls = s.__class__
        if cls is Do or cls is Handle:
            return True
    return False


def language_level(t: Term) -> str:
    """Classify a term by the features it uses: 'base', 'handler',
    'base+memo', 'state', or 'handler+state' for the combination."""

    has_eff = False
    has_ref = False
    has_memo = False
    for s in subterms(t):
        cls = s.__class__
        if cls is Do or cls is Handle:
            has_eff = True
        elif cls in (LetRef, Deref, Assign, Loc):
            has_ref = True
        elif cls is Const and s.name == "memoise":
            has_memo = True
    if has_eff and has_ref:
        return "handler+state"
    if has_ref:
        return "state"
    if has_eff:
        return "handler"
    if has_memo:
        return "base+memo"
    return "base"


def complete_handler(h: Handler, sig: Signature) -> Handler:
    """Fill in missing operation clauses with explicit forwarding.

    Each inserted clause re-performs the operation and feeds the answer to
    the resumption, so an outer handler gets the chance to interpret it.
    Already-total handlers come back unchanged (the same object), which
    also makes the operation idempotent.
    """

    missing = [op for op in sig if op not in h.clauses]
    if not missing:
        return h
    clauses = dict(h.clauses)
    for op in missing:
        p, r, x = f"{op}.p", f"{op}.r", f"{op}.x"
        clauses[op] = (p, r, Let(x, Do(op, Var(p)), App(Var(r), Var(x))))
    return Handler(h.val_name, h.val_body, clauses)


def complete_handlers(t: Term, sig: Signature) -> Term:
    """Apply the forwarding completion to every handler inside a term."""

    cls = t.__class__
    if cls in (Var, Num, Const, UnitVal, Nil, Loc, Quote):
        return t
    if cls is Lam:
        return Lam(t.param, complete_handlers(t.body, sig), t.param_type)
    if cls is Rec:
        return Rec(t.fname, t.param, complete_handlers(t.body, sig), t.fn_type)
    if cls is Pair:
        return Pair(complete_handlers(t.fst, sig), complete_handlers(t.snd, sig))
    if cls is Inl:
        return Inl(complete_handlers(t.value, sig), t.ann)
    if cls is Inr:
        return Inr(complete_handlers(t.value, sig), t.ann)
    if cls is Cons:
        return Cons(complete_handlers(t.head, sig), complete_handlers(t.tail, sig))
    if cls is App:
        return App(complete_handlers(t.fn, sig), complete_handlers(t.arg, sig))
    if cls is Return:
        return Return(complete_handlers(t.value, sig))
    if cls is Let:
        return Let(t.name, complete_handlers(t.bound, sig), complete_handlers(t.body, sig))
    if cls is Split:
        return Split(
            complete_handlers(t.pair, sig), t.fst_name, t.snd_name, complete_handlers(t.body, sig)
        )
    if cls is Case:
        return Case(
            complete_handlers(t.scrutinee, sig),
            t.left_name,
            complete_handlers(t.left, sig),
            t.right_name,
            complete_handlers(t.right, sig),
        )
    if cls is CaseList:
        return CaseList(
            complete_handlers(t.scrutinee, sig),
            complete_handlers(t.nil_body, sig),
            t.head_name,
            t.tail_name,
            complete_handlers(t.cons_body, sig),
        )
    if cls is Do:
        return Do(t.op, complete_handlers(t.arg, sig))
    if cls is Handle:
        h = t.handler
        h2 = Handler(
            h.val_name,
            complete_handlers(h.val_body, sig),
            {op: (p, r, complete_handlers(b, sig)) for op, (p, r, b) in h.clauses.items()},
        )
        return Handle(complete_handlers(t.body, sig), complete_handler(h2, sig))
    if cls is LetRef:
        return LetRef(t.name, complete_handlers(t.init, sig), complete_handlers(t.body, sig))
    if cls is Deref:
        return Deref(complete_handlers(t.ref, sig))
    if cls is Assign:
        return Assign(complete_handlers(t.ref, sig), complete_handlers(t.value, sig))
    raise TypeError(f"unknown term node {cls.__name__}")  # pragma: no cover

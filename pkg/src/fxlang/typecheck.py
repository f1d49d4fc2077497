"""Bidirectional type checker for the core language.

Most forms infer; introduction forms whose type is not determined by
their parts (`inl`, `inr`, `[]`, unannotated `fun`) must either carry an
annotation or sit in a checking position.  This keeps annotations where
inference would be non-local and nowhere else.

`memoise` is a polymorphic primitive: applied to a thunk of type
`Unit -> A` it yields a thunk of the same type.
"""

from __future__ import annotations

from fxlang import syntax as sx
from fxlang.pprint import type_to_source
from fxlang.syntax import (
    App,
    Arrow,
    Assign,
    BOOL,
    Case,
    CaseList,
    Cons,
    Const,
    Deref,
    Do,
    Handle,
    Inl,
    Inr,
    Lam,
    Let,
    LetRef,
    ListType,
    Loc,
    NAT,
    Nil,
    Num,
    Pair,
    Prod,
    Quote,
    Rec,
    RefType,
    Return,
    Signature,
    Split,
    Sum,
    Term,
    Type,
    UNIT,
    UnitVal,
    Var,
)

TypeEnv = dict[str, Type]


class TypeCheckError(Exception):
    def __init__(self, msg: str, path: tuple[str, ...] = ()):
        loc = " at " + "/".join(path) if path else ""
        super().__init__(msg + loc)
        self.msg = msg
        self.path = path


def _mismatch(expected: Type, actual: Type, path) -> TypeCheckError:
    return TypeCheckError(
        f"type mismatch: expected {type_to_source(expected)}, got {type_to_source(actual)}",
        path,
    )


def typecheck(env: TypeEnv, term: Term, sig: Signature | None = None) -> Type:
    """Infer the unique type of a term, or raise `TypeCheckError`."""

    return _infer(env, term, sig or {}, ())


def check(env: TypeEnv, term: Term, expected: Type, sig: Signature | None = None) -> None:
    _check(env, term, expected, sig or {}, ())


def typecheck_program(sig: Signature, term: Term) -> Type:
    return typecheck({}, term, sig)


def _infer(env: TypeEnv, t: Term, sig: Signature, path) -> Type:
    cls = t.__class__
    # values
    if cls is Var:
        ty = env.get(t.name)
        if ty is None:
            raise TypeCheckError(f"unbound variable {t.name!r}", path)
        return ty
    if cls is Num:
        return NAT
    if cls is UnitVal:
        return UNIT
    if cls is Const:
        ty = sx.CONST_TYPES.get(t.name)
        if ty is None:
            raise TypeCheckError(
                f"constant {t.name!r} has no standalone type; apply it", path
            )
        return ty
    if cls is Lam:
        if t.param_type is None:
            raise TypeCheckError("parameter type annotation required here", path)
        body = _infer({**env, t.param: t.param_type}, t.body, sig, path + ("fun",))
        return Arrow(t.param_type, body)
    if cls is Rec:
        fty = t.fn_type
        if not isinstance(fty, Arrow):
            raise TypeCheckError("rec needs an arrow type annotation", path)
        _check(
            {**env, t.fname: fty, t.param: fty.dom},
            t.body,
            fty.cod,
            sig,
            path + ("rec",),
        )
        return fty
    if cls is Pair:
        return Prod(
            _infer(env, t.fst, sig, path + ("fst",)),
            _infer(env, t.snd, sig, path + ("snd",)),
        )
    if cls is Inl:
        if not isinstance(t.ann, Sum):
            raise TypeCheckError("inl needs a sum type annotation here", path)
        _check(env, t.value, t.ann.left, sig, path + ("inl",))
        return t.ann
    if cls is Inr:
        if not isinstance(t.ann, Sum):
            raise TypeCheckError("inr needs a sum type annotation here", path)
        _check(env, t.value, t.ann.right, sig, path + ("inr",))
        return t.ann
    if cls is Nil:
        if t.ann is None:
            raise TypeCheckError("[] needs a list type annotation here", path)
        return ListType(t.ann)
    if cls is Cons:
        head = _infer(env, t.head, sig, path + ("cons-head",))
        _check(env, t.tail, ListType(head), sig, path + ("cons-tail",))
        return ListType(head)
    if cls is Loc:
        raise TypeCheckError("store locations cannot appear in source programs", path)
    if cls is Quote:
        raise TypeCheckError("runtime values cannot appear in source programs", path)

    # computations
    if cls is App:
        fn, arg = t.fn, t.arg
        if fn.__class__ is Const and fn.name == "memoise":
            thunk = _infer(env, arg, sig, path + ("memoise",))
            if not (isinstance(thunk, Arrow) and thunk.dom == UNIT):
                raise TypeCheckError(
                    f"memoise expects a thunk Unit -> A, got {type_to_source(thunk)}",
                    path,
                )
            return thunk
        fty = _infer(env, fn, sig, path + ("fn",))
        if not isinstance(fty, Arrow):
            raise _mismatch(Arrow(UNIT, UNIT), fty, path + ("fn",))
        _check(env, arg, fty.dom, sig, path + ("arg",))
        return fty.cod
    if cls is Return:
        return _infer(env, t.value, sig, path + ("return",))
    if cls is Let:
        bound = _infer(env, t.bound, sig, path + (f"let {t.name}",))
        return _infer({**env, t.name: bound}, t.body, sig, path)
    if cls is Split:
        pty = _infer(env, t.pair, sig, path + ("split",))
        if not isinstance(pty, Prod):
            raise _mismatch(Prod(UNIT, UNIT), pty, path + ("split",))
        return _infer(
            {**env, t.fst_name: pty.fst, t.snd_name: pty.snd}, t.body, sig, path
        )
    if cls is Case:
        sty = _infer(env, t.scrutinee, sig, path + ("case",))
        if not isinstance(sty, Sum):
            raise _mismatch(BOOL, sty, path + ("case",))
        lty = _infer({**env, t.left_name: sty.left}, t.left, sig, path + ("case-inl",))
        _check({**env, t.right_name: sty.right}, t.right, lty, sig, path + ("case-inr",))
        return lty
    if cls is CaseList:
        sty = _infer(env, t.scrutinee, sig, path + ("case",))
        if not isinstance(sty, ListType):
            raise _mismatch(ListType(UNIT), sty, path + ("case",))
        nty = _infer(env, t.nil_body, sig, path + ("case-nil",))
        _check(
            {**env, t.head_name: sty.elem, t.tail_name: sty},
            t.cons_body,
            nty,
            sig,
            path + ("case-cons",),
        )
        return nty
    if cls is Do:
        opty = sig.get(t.op)
        if opty is None:
            raise TypeCheckError(f"operation {t.op!r} not in the signature", path)
        a, b = opty
        _check(env, t.arg, a, sig, path + (f"do {t.op}",))
        return b
    if cls is Handle:
        cty = _infer(env, t.body, sig, path + ("handle",))
        h = t.handler
        dty = _infer({**env, h.val_name: cty}, h.val_body, sig, path + ("val",))
        for op, (p, r, body) in h.clauses.items():
            opty = sig.get(op)
            if opty is None:
                raise TypeCheckError(f"clause for unknown operation {op!r}", path)
            a, b = opty
            _check(
                {**env, p: a, r: Arrow(b, dty)},
                body,
                dty,
                sig,
                path + (f"clause {op}",),
            )
        return dty
    if cls is LetRef:
        ity = _infer(env, t.init, sig, path + (f"letref {t.name}",))
        return _infer({**env, t.name: RefType(ity)}, t.body, sig, path)
    if cls is Deref:
        rty = _infer(env, t.ref, sig, path + ("deref",))
        if not isinstance(rty, RefType):
            raise _mismatch(RefType(UNIT), rty, path + ("deref",))
        return rty.elem
    if cls is Assign:
        rty = _infer(env, t.ref, sig, path + ("assign",))
        if not isinstance(rty, RefType):
            raise _mismatch(RefType(UNIT), rty, path + ("assign",))
        _check(env, t.value, rty.elem, sig, path + ("assign",))
        return UNIT
    raise TypeCheckError(f"cannot type node {cls.__name__}", path)  # pragma: no cover


def _check(env: TypeEnv, t: Term, expected: Type, sig: Signature, path) -> None:
    cls = t.__class__
    if cls is Lam and isinstance(expected, Arrow):
        if t.param_type is not None and t.param_type != expected.dom:
            raise _mismatch(expected.dom, t.param_type, path)
        _check({**env, t.param: expected.dom}, t.body, expected.cod, sig, path + ("fun",))
        return
    if cls is Inl and isinstance(expected, Sum):
        if t.ann is not None and t.ann != expected:
            raise _mismatch(expected, t.ann, path)
        _check(env, t.value, expected.left, sig, path + ("inl",))
        return
    if cls is Inr and isinstance(expected, Sum):
        if t.ann is not None and t.ann != expected:
            raise _mismatch(expected, t.ann, path)
        _check(env, t.value, expected.right, sig, path + ("inr",))
        return
    if cls is Nil and isinstance(expected, ListType):
        if t.ann is not None and t.ann != expected.elem:
            raise _mismatch(expected.elem, t.ann, path)
        return
    if cls is Cons and isinstance(expected, ListType):
        _check(env, t.head, expected.elem, sig, path + ("cons-head",))
        _check(env, t.tail, expected, sig, path + ("cons-tail",))
        return
    if cls is Pair and isinstance(expected, Prod):
        _check(env, t.fst, expected.fst, sig, path + ("fst",))
        _check(env, t.snd, expected.snd, sig, path + ("snd",))
        return
    if cls is Return:
        _check(env, t.value, expected, sig, path + ("return",))
        return
    if cls is Let:
        bound = _infer(env, t.bound, sig, path + (f"let {t.name}",))
        _check({**env, t.name: bound}, t.body, expected, sig, path)
        return
    if cls is Case:
        sty = _infer(env, t.scrutinee, sig, path + ("case",))
        if not isinstance(sty, Sum):
            raise _mismatch(BOOL, sty, path + ("case",))
        _check({**env, t.left_name: sty.left}, t.left, expected, sig, path + ("case-inl",))
        _check({**env, t.right_name: sty.right}, t.right, expected, sig, path + ("case-inr",))
        return
    if cls is CaseList:
        sty = _infer(env, t.scrutinee, sig, path + ("case",))
        if not isinstance(sty, ListType):
            raise _mismatch(ListType(UNIT), sty, path + ("case",))
        _check(env, t.nil_body, expected, sig, path + ("case-nil",))
        _check(
            {**env, t.head_name: sty.elem, t.tail_name: sty},
            t.cons_body,
            expected,
            sig,
            path + ("case-cons",),
        )
        return
    if cls is Split:
        pty = _infer(env, t.pair, sig, path + ("split",))
        if not isinstance(pty, Prod):
            raise _mismatch(Prod(UNIT, UNIT), pty, path + ("split",))
        _check({**env, t.fst_name: pty.fst, t.snd_name: pty.snd}, t.body, expected, sig, path)
        return
    actual = _infer(env, t, sig, path)
    if actual != expected:
        raise _mismatch(expected, actual, path)

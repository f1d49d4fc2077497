"""Mapping machine configurations back to terms.

Closures re-substitute their environments, continuations rebuild the
let- and handle-nests they stand for, and a resumption value becomes the
function that restarts its captured continuation.  The map is invariant
under the administrative transitions (M-Let, M-Handle) and follows each
beta-like transition by exactly one small-step reduction; the simulation
tests lean on both facts.
"""

from __future__ import annotations

from fxlang import machine as mc
from fxlang.smallstep import subst
from fxlang.syntax import (
    Const,
    Handle,
    Handler,
    Lam,
    Let,
    Loc,
    Nil,
    Num,
    Pair,
    Cons,
    Inl,
    Inr,
    Quote,
    Rec,
    Return,
    Term,
    UNIT_V,
    Var,
    free_vars,
)

_resume_counter = 0


def _fresh_resume() -> str:
    global _resume_counter
    _resume_counter += 1
    return f"resume.y{_resume_counter}"


def reify(v) -> Term:
    """A machine value as the closed value term it denotes."""

    cls = v.__class__
    if cls is int:
        return Num(v)
    if cls is mc.VUnit:
        return UNIT_V
    if cls is mc.VPair:
        return Pair(reify(v.fst), reify(v.snd))
    if cls is mc.VInl:
        return Inl(reify(v.value))
    if cls is mc.VInr:
        return Inr(reify(v.value))
    if cls is mc.VNil:
        return Nil()
    if cls is mc.VCons:
        return Cons(reify(v.head), reify(v.tail))
    if cls is mc.VClosure:
        lam: Lam = v.term
        return Lam(lam.param, open_term(lam.body, v.env, {lam.param}), lam.param_type)
    if cls is mc.VRecClosure:
        rec: Rec = v.term
        return Rec(
            rec.fname,
            rec.param,
            open_term(rec.body, v.env, {rec.fname, rec.param}),
            rec.fn_type,
        )
    if cls is Const:
        return v
    if cls is mc.VLoc:
        return Loc(v.index)
    if cls is mc.VSentinel:
        return Var(v.name)
    if cls is tuple:  # resumption: restart its continuation on the argument
        y = _fresh_resume()
        return Lam(y, resumption_body(v, Return(Var(y))))
    if cls is mc.VMemo:
        # Memoisation only changes cost; as a term, the wrapper is the thunk.
        return reify(v.thunk)
    raise TypeError(f"cannot reify {v!r}")


def open_term(t: Term, env: dict, bound: set[str]) -> Term:
    """Substitute an environment's values into a term's free variables."""

    need = free_vars(t) - bound
    if not need:
        return t
    mapping = {x: reify(env[x]) for x in need if x in env}
    return subst(t, mapping)


def decompile_term(t: Term, env: dict) -> Term:
    t = _strip_quotes(t)
    return open_term(t, env, set())


def _strip_quotes(t: Term) -> Term:
    if t.__class__ is Quote:
        return reify(t.mval)
    if t.__class__ is Return and t.value.__class__ is Quote:
        return Return(reify(t.value.mval))
    return t


def wrap_pure_cont(sigma, m: Term) -> Term:
    """Rebuild the let-nest a pure continuation stands for around m."""

    while sigma is not None:
        frame, sigma = sigma
        if frame[1] is None:  # memo-record frame: transparent as a term
            continue
        fenv, x, body = frame
        m = Let(x, m, open_term(body, fenv, {x}))
    return m


def decompile_handler_def(h: Handler, env: dict) -> Handler:
    return Handler(
        h.val_name,
        open_term(h.val_body, env, {h.val_name}),
        {
            op: (p, r, open_term(b, env, {p, r}))
            for op, (p, r, b) in h.clauses.items()
        },
    )


def resumption_body(rho, m: Term) -> Term:
    sigma, (henv, h) = rho
    return Handle(wrap_pure_cont(sigma, m), decompile_handler_def(h, henv))


def decompile_base(cfg: mc.BaseConfig) -> Term:
    return wrap_pure_cont(cfg.cont, decompile_term(cfg.comp, cfg.env))


def decompile_handler(cfg: mc.HandlerConfig) -> Term:
    m = decompile_term(cfg.comp, cfg.env)
    kont = cfg.kont
    while kont is not None:
        rho, kont = kont
        m = resumption_body(rho, m)
    return m

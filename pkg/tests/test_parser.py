import pytest

from fxlang.parser import ParseError, parse_program, parse_term
from fxlang.pprint import to_source
from fxlang.syntax import (
    App,
    Case,
    Const,
    Inl,
    Lam,
    Let,
    Num,
    Pair,
    Return,
    UnitVal,
    Var,
    alpha_eq,
)


def roundtrip(src, sig=None):
    t = parse_term(src, sig)
    again = parse_term(to_source(t), sig)
    assert alpha_eq(t, again), f"{src!r} -> {to_source(t)!r}"
    return t


def test_return_literal():
    t = parse_term("return 0")
    assert isinstance(t, Return) and isinstance(t.value, Num) and t.value.value == 0


def test_direct_style_left_to_right():
    # f (h w) + g ()  elaborates to the flat let-normal form.
    t = parse_term("f (h w) + g ()")
    want = Let(
        "x",
        App(Var("h"), Var("w")),
        Let(
            "y",
            App(Var("f"), Var("x")),
            Let(
                "z",
                App(Var("g"), UnitVal()),
                App(Const("+"), Pair(Var("y"), Var("z"))),
            ),
        ),
    )
    assert alpha_eq(t, want)


def test_if_desugars_to_case_on_units():
    t = parse_term("if v then return 1 else return 2")
    assert isinstance(t, Case)
    assert isinstance(t.left, Return) and t.left.value.value == 1
    # the binders are unused unit patterns
    assert t.left_name != t.right_name


def test_sequencing_desugars_to_let():
    t = parse_term("q 1; q 0; true")
    assert isinstance(t, Let) and isinstance(t.body, Let)
    assert isinstance(t.body.body, Return)


def test_booleans_are_sums():
    t = parse_term("return true")
    assert isinstance(t.value, Inl) and isinstance(t.value.value, UnitVal)


@pytest.mark.parametrize(
    "src",
    [
        "return 0",
        "f (h w) + g ()",
        "let q = (fun i -> i = 0) in q 0 && q 1",
        "let (a, b) = p in a + b",
        "letref x = 0 in (x := 1); !x",
        "[1, 2, 3]",
        "1 :: 2 :: []",
        "(rec f i -> f i) ()",
        "fun (q : Nat -> Bool) -> q 0",
        "case [] {[] -> return 0; x :: xs -> return 1}",
        "case inl 3 {inl x -> x + 1; inr y -> return 0}",
        "memoise (fun () -> return [])",
        "(inl 3 : Nat + Bool)",
        "do Branch () || do Branch ()",
        "(+)",
        "q 1; q 0; true",
        "if a && b then return 1 else return 0",
    ],
)
def test_print_parse_roundtrip(src):
    sig = {"Branch": (__import__("fxlang.syntax", fromlist=["UNIT"]).UNIT,
                      __import__("fxlang.syntax", fromlist=["BOOL"]).BOOL)}
    roundtrip(src, sig)


def test_handler_roundtrip():
    src = """
operation Branch : Unit -> Bool
handle pred (fun _ -> do Branch ()) with {
  val x -> if x then return 1 else return 0;
  Branch () r -> let a <- r true in let b <- r false in a + b
}
"""
    sig, term = parse_program(src)
    assert "Branch" in sig
    again = parse_term(to_source(term), sig)
    assert alpha_eq(term, again)


def test_binders_are_unique():
    t = parse_term("let x = 1 in let x = 2 in (fun x -> return x) x")
    names = set()

    def collect(term):
        from fxlang.syntax import Lam, Let, subterms

        for s in subterms(term):
            if isinstance(s, Let):
                assert s.name not in names
                names.add(s.name)
            elif isinstance(s, Lam):
                assert s.param not in names
                names.add(s.param)

    collect(t)
    assert len(names) == 3


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_term("let x <- return 1 in\nreturn )")
    assert exc.value.line == 2


def test_unknown_operation_rejected():
    with pytest.raises(ParseError, match="unknown operation"):
        parse_term("do Branch ()")  # no signature in scope


def test_duplicate_operation_declaration():
    with pytest.raises(ParseError, match="declared twice"):
        parse_program(
            "operation A : Unit -> Nat\noperation A : Unit -> Nat\nreturn 0"
        )


def test_shadowing_resolved():
    t = parse_term("let x = 1 in let x = x + 1 in x + x")
    # the inner x + x refers to the second binder only
    assert isinstance(t, Let)
    inner = t.body
    while not isinstance(inner.bound, Return) or not isinstance(inner.body, App):
        inner = inner.body
    final = inner.body
    assert final.arg.fst.name == final.arg.snd.name

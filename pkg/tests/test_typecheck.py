import pytest

from fxlang import countlib as cl
from fxlang.parser import parse_program, parse_term
from fxlang.syntax import (
    Arrow,
    BOOL,
    ListType,
    NAT,
    PREDICATE,
    Prod,
    Sum,
    UNIT,
)
from fxlang.typecheck import TypeCheckError, typecheck, typecheck_program

BRANCH_SIG = {"Branch": (UNIT, BOOL)}


def ty_of(src, sig=None, env=None):
    return typecheck(env or {}, parse_term(src, sig), sig)


def test_return_unit():
    assert ty_of("return ()") == UNIT


def test_do_branch_is_bool():
    assert ty_of("do Branch ()", BRANCH_SIG) == BOOL


def test_odd_is_a_predicate():
    term, sig = cl.get("odd").build(2)
    assert typecheck_program(sig, term) == PREDICATE


def test_constants():
    assert ty_of("2 + 3") == NAT
    assert ty_of("2 - 3") == NAT
    assert ty_of("2 = 3") == BOOL
    assert ty_of("return (+)") == Arrow(Prod(NAT, NAT), NAT)


def test_unbound_variable():
    with pytest.raises(TypeCheckError, match="unbound variable"):
        ty_of("return nope")


def test_mismatch_reports_expected_and_actual():
    with pytest.raises(TypeCheckError, match=r"expected Nat, got .Bool"):
        ty_of("1 + (true, ())")


def test_mismatch_carries_path():
    with pytest.raises(TypeCheckError, match="case-inr"):
        ty_of("case true {inl x -> return 1; inr y -> return ()}")


def test_operation_argument_checked():
    with pytest.raises(TypeCheckError):
        ty_of("do Branch 3", BRANCH_SIG)


def test_handler_clause_types():
    src = """
operation Branch : Unit -> Bool
handle do Branch () with {
  val x -> return 0;
  Branch () r -> let a <- r true in a + 1
}
"""
    sig, term = parse_program(src)
    assert typecheck_program(sig, term) == NAT


def test_handler_resumption_misuse():
    src = """
operation Branch : Unit -> Bool
handle do Branch () with {
  val x -> return 0;
  Branch () r -> r 3
}
"""
    sig, term = parse_program(src)
    with pytest.raises(TypeCheckError):
        typecheck_program(sig, term)


def test_refs():
    assert ty_of("letref x = 4 in !x") == NAT
    assert ty_of("letref x = 4 in x := 7") == UNIT
    with pytest.raises(TypeCheckError):
        ty_of("letref x = 4 in x := true")
    with pytest.raises(TypeCheckError):
        ty_of("!3")


def test_lists():
    assert ty_of("return [1, 2]") == ListType(NAT)
    assert ty_of("return ([] : List Nat)") == ListType(NAT)
    with pytest.raises(TypeCheckError, match="annotation"):
        ty_of("return []")
    with pytest.raises(TypeCheckError):
        ty_of("return (1 :: true :: [])")


def test_sum_annotations():
    assert ty_of("return (inl 3 : Nat + Bool)") == Sum(NAT, BOOL)
    with pytest.raises(TypeCheckError, match="annotation"):
        ty_of("return (inl 3)")


def test_memoise_typing():
    assert ty_of("memoise (fun () -> return [true])") == Arrow(UNIT, ListType(BOOL))
    with pytest.raises(TypeCheckError, match="memoise"):
        ty_of("memoise 3")


def test_lambda_needs_annotation_in_infer_position():
    with pytest.raises(TypeCheckError, match="annotation"):
        ty_of("return (fun x -> return x)")
    # ... but not in a checked position
    assert ty_of("(fun (f : Nat -> Nat) -> f 1) (fun x -> x + 1)") == NAT


def test_rec_needs_arrow_annotation():
    with pytest.raises(TypeCheckError, match="arrow"):
        ty_of("(rec f x -> f x) ()")
    assert ty_of("(rec (f : Nat -> Nat) x -> return x) 3") == NAT


def test_catalog_typechecks_at_many_sizes():
    cl.validate_catalog(1)
    cl.validate_catalog(2)
    cl.validate_catalog(5)
    cl.validate_catalog(12)

from itertools import product
from random import Random

import pytest

from fxlang import countlib as cl
from fxlang import machine as mc
from fxlang import trees as tr
from fxlang.parser import parse_term
from fxlang.syntax import App


def extract(name, n=None, **kw):
    pred, bits = cl.build_predicate(name, n)
    return tr.extract_tree(pred, **kw), bits


def test_identity_predicate_tree():
    tree, _ = extract("I0", 1)
    labels = tree.labels()
    assert labels[()] == tr.Query(0)
    assert labels[(True,)] == tr.Answer(True)
    assert labels[(False,)] == tr.Answer(False)
    assert tree.classify(1) is tr.Classification.N_STANDARD


def test_constant_true_tree():
    tree, _ = extract("T0", 0)
    assert tree.labels() == {(): tr.Answer(True)}
    assert tree.classify(0) is tr.Classification.N_STANDARD


def test_repeated_query_tree():
    tree, _ = extract("I2", 1)
    # ?0 repeats along the true path; one false leaf is unreachable
    assert tree.labels()[()] == tr.Query(0)
    assert tree.labels()[(True,)] == tr.Query(0)
    kind, reason = tree.classify_detail(1)
    assert kind is tr.Classification.N_PREDICATE
    assert "repeated query 0" in reason


def test_odd_trees_are_standard():
    for n in range(1, 6):
        tree, _ = extract("odd", n)
        assert tree.classify(n) is tr.Classification.N_STANDARD
        assert len(tree.nodes) == 2 ** (n + 1) - 1
        assert len(tree.leaves()) == 2 ** n
        assert tree.count_true(n) == 2 ** (n - 1)


def test_sequencing_predicate_is_literally_standard():
    # queries each index exactly once per path, so the literal reading of
    # the standardness conditions accepts it
    tree, _ = extract("T1", 2)
    assert tree.classify(2) is tr.Classification.N_STANDARD


def test_empty_tree_is_neither():
    assert tr.DecisionTree().classify(1) is tr.Classification.NEITHER


def test_eval_point_examples():
    odd2, _ = extract("odd", 2)
    assert odd2.eval_point((True, False)) is True
    assert odd2.eval_point((True, True)) is False
    t0, _ = extract("T0", 0)
    assert t0.eval_point(()) is True


def test_eval_point_agrees_with_machine_exhaustively():
    rng = Random(11)
    for trial in range(50):
        n = rng.randrange(1, 7)
        tree = tr.random_standard_tree(rng, n)
        pred = tr.tree_to_predicate(tree)
        extracted = tr.extract_tree(pred)
        for pt in product((False, True), repeat=n):
            direct = mc.run_machine(App(pred, cl.as_value(cl.point_term(list(pt)))), {})
            assert extracted.eval_point(pt) == mc.mval_to_bool(direct.value)


def test_count_true_examples():
    odd3, _ = extract("odd", 3)
    assert odd3.count_true(3) == 4
    all_true = tr.DecisionTree()
    all_true.nodes[()] = tr.TreeNode(tr.Query(0))
    for b in (True, False):
        all_true.nodes[(b,)] = tr.TreeNode(tr.Query(1))
        for c in (True, False):
            all_true.nodes[(b, c)] = tr.TreeNode(tr.Answer(True))
    assert all_true.count_true(2) == 4


def test_count_true_matches_brute_force():
    rng = Random(12)
    tree = tr.random_standard_tree(rng, 8)
    assert tree.count_true(8) == tree.brute_force_count(8)


def test_count_true_rejects_nonstandard():
    tree, _ = extract("I2", 1)
    with pytest.raises(ValueError):
        tree.count_true(1)


def test_flip_leaf():
    tree, _ = extract("I0", 1)
    flipped = tree.flip_leaf((True,))
    assert flipped.labels()[(True,)] == tr.Answer(False)
    assert flipped.count_true(1) == 0
    assert flipped.flip_leaf((True,)).labels() == tree.labels()
    with pytest.raises(ValueError):
        tree.flip_leaf(())  # a query node


def test_flip_leaf_changes_count_by_one():
    rng = Random(13)
    for _ in range(30):
        n = rng.randrange(1, 7)
        tree = tr.random_standard_tree(rng, n)
        leaves = tree.leaves()
        leaf = leaves[rng.randrange(len(leaves))]
        flipped = tree.flip_leaf(leaf)
        assert abs(tree.brute_force_count(n) - flipped.brute_force_count(n)) == 1


def test_tree_to_predicate_roundtrip_standard():
    rng = Random(14)
    for _ in range(100):
        n = rng.randrange(1, 6)
        tree = tr.random_standard_tree(rng, n)
        back = tr.extract_tree(tr.tree_to_predicate(tree))
        assert back.labels() == tree.labels()


def test_tree_to_predicate_roundtrip_general():
    rng = Random(15)
    for _ in range(50):
        tree = tr.random_predicate_tree(rng, 3)
        back = tr.extract_tree(tr.tree_to_predicate(tree))
        assert back.labels() == tree.labels()


def test_compiled_predicates_are_pure():
    from fxlang.syntax import language_level

    rng = Random(16)
    tree = tr.random_standard_tree(rng, 4)
    assert language_level(tr.tree_to_predicate(tree)) == "base"


def test_divergent_branch_is_partial():
    pred = parse_term(
        "fun (q : Nat -> Bool) -> let a <- q 0 in "
        "if a then (rec (f : Unit -> Bool) u -> f u) () else return false"
    )
    tree = tr.extract_tree(pred, fuel=2_000)
    assert tree.partial.get((True,)) == "fuel"
    assert tree.labels()[(False,)] == tr.Answer(False)
    assert tree.classify(1) is tr.Classification.NEITHER


def test_depth_bound_flags_partial():
    pred = parse_term(
        "fun (q : Nat -> Bool) -> (rec (go : Nat -> Bool) i -> let _ <- q 0 in go 0) 0"
    )
    tree = tr.extract_tree(pred, fuel=100_000, depth_bound=3)
    assert tree.is_partial()
    assert any(v == "depth" for v in tree.partial.values())


def test_unhandled_operation_branch_absent():
    from fxlang.syntax import BOOL, UNIT

    sig = {"Oops": (UNIT, BOOL)}
    pred = parse_term("fun (q : Nat -> Bool) -> do Oops ()", sig)
    tree = tr.extract_tree(pred, sig=sig)
    assert tree.partial.get(()) == "unhandled"
    assert not tree.nodes


def test_stateful_predicates_rejected():
    pred = parse_term("fun (q : Nat -> Bool) -> letref c = 0 in q 0")
    with pytest.raises(ValueError, match="stateful"):
        tr.extract_tree(pred)


def test_projections_align():
    tree, _ = extract("odd", 3)
    labs = tree.labels()
    steps = tree.steps()
    assert set(labs) == set(steps) == set(tree.nodes)
    assert all(s >= 0 for s in steps.values())
    # decoration present: every node carries its stopped configuration
    assert all(node.config is not None for node in tree.nodes.values())


def test_text_format():
    tree, _ = extract("I0", 1)
    text = tree.to_text(timed=True)
    lines = text.splitlines()
    assert lines[0].startswith("ε ?0 ")
    assert any(line.startswith("t !true") for line in lines)
    untimed = tree.to_text(timed=False)
    assert untimed.splitlines()[0] == "ε ?0"


def test_dot_format():
    tree, _ = extract("I0", 1)
    dot = tree.to_dot()
    assert "shape=circle" in dot and "shape=box" in dot
    assert dot.startswith("digraph")

"""The acceptance gate: every criterion runs at its stated tolerance and
prints one pass/fail line.

These are the project's exit criteria; `fx selftest` runs the same
checks from the command line.  Expensive measurements are shared through
a session-scoped context.
"""

import pytest

from fxlang import acceptance as ac


@pytest.fixture(scope="session")
def ctx():
    return ac.AcceptanceContext()


def _check(ctx, index):
    name, fn = ac.CRITERIA[index - 1]
    passed, detail = fn(ctx)
    print(f"criterion {index}: {name}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {index} ({name}): {detail}"


def test_criterion_01_effcount_counts_exactly(ctx):
    _check(ctx, 1)


def test_criterion_02_exact_step_formula(ctx):
    _check(ctx, 2)


def test_criterion_03_naive_lower_bound(ctx):
    _check(ctx, 3)


def test_criterion_04_asymptotic_gap(ctx):
    _check(ctx, 4)


def test_criterion_05_machine_simulates_smallstep(ctx):
    _check(ctx, 5)


def test_criterion_06_decision_tree_fidelity(ctx):
    _check(ctx, 6)


def test_criterion_07_leaf_flip_sensitivity(ctx):
    _check(ctx, 7)


def test_criterion_08_variant_counters(ctx):
    _check(ctx, 8)


def test_criterion_09_search_count_coherence(ctx):
    _check(ctx, 9)


def test_criterion_10_lazy_and_berger(ctx):
    _check(ctx, 10)

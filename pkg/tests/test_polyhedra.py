from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from contexture.lp import LpProblem, LpStatus, lp_feasible, lp_solve
from contexture.polyhedra import (EQ, LE, ConstraintSystem, PolyhedronError, Row, SignedMax,
                                  SignedMaxSpec, expand_signed_max, fm_eliminate, implies,
                                  remove_redundant, systems_equivalent)
from contexture.rational import LinearExpr

import oracles
from fm_checks import fm_one_var_check, fm_two_var_check, random_system as _random_system

Q = Fraction
x, y, z = LinearExpr.var("x"), LinearExpr.var("y"), LinearExpr.var("z")


def system(variables, *constraints):
    return ConstraintSystem.build(variables, constraints)


# -- canonical rows ---------------------------------------------------------

def test_rows_are_scaled_to_coprime_integers():
    s = system("xy", (x * Q(1, 2) + y * Q(3, 4), "<=", 1))
    (row,) = s.rows
    assert row.coeffs == (2, 3) and row.rhs == 4


def test_equalities_get_positive_leading_coefficient():
    s = system("xy", (-x * 2 + y * 4, "=", 6))
    (row,) = s.rows
    assert row.coeffs == (1, -2) and row.rhs == -3


def test_duplicates_and_trivial_rows():
    s = system("xy", (x, "<=", 1), (x * 2, "<=", 4), (x * 0, "<=", 5), (x - x, ">=", -2))
    assert s.format() == ["x <= 1"]


def test_trivially_false_row():
    s = system("x", (x * 0, "<=", -1))
    assert s.is_trivially_infeasible() and not s.feasible()
    assert system("x", (x, "=", 1), (x, "=", 2)).is_trivially_infeasible()


def test_unknown_variable_rejected():
    with pytest.raises(PolyhedronError):
        system("x", (y, "<=", 1))


# -- signed maxima ----------------------------------------------------------

def test_expand_single_odd_term():
    s = expand_signed_max(SignedMaxSpec(("x",), "odd", LinearExpr.const(5)))
    assert s.format() == ["-x <= 5"]


def test_expand_two_even_terms():
    s = expand_signed_max(SignedMaxSpec(("x", "y"), "even", LinearExpr.const(4)))
    assert sorted(s.format()) == sorted(["x + y <= 4", "-x - y <= 4"])


def test_expand_coupled_maxima():
    xs = tuple(f"x{k}" for k in range(4))
    ys = tuple(f"y{k}" for k in range(4))
    spec = SignedMaxSpec(xs, "even", LinearExpr.const(6), extra=(SignedMax(ys, "odd"),))
    assert len(expand_signed_max(spec)) == 64


@pytest.mark.parametrize("n", range(1, 8))
@pytest.mark.parametrize("parity", ["even", "odd"])
def test_expand_row_count(n, parity):
    names = tuple(f"t{k}" for k in range(n))
    rows = expand_signed_max(SignedMaxSpec(names, parity, LinearExpr.const(n)))
    assert len(rows) == 2 ** (n - 1)


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=6), min_size=1, max_size=5),
       st.sampled_from(["even", "odd"]), st.fractions(min_value=-4, max_value=8, max_denominator=6))
def test_expansion_means_max_below_bound(values, parity, bound):
    from contexture.measures import s_signed_max
    names = tuple(f"t{k}" for k in range(len(values)))
    s = expand_signed_max(SignedMaxSpec(names, parity, LinearExpr.const(bound)))
    point = dict(zip(names, values))
    assert s.satisfied_by(point) == (s_signed_max(values, parity) <= bound)


def test_max_bounded_from_below_is_rejected():
    with pytest.raises(PolyhedronError):
        SignedMax(("x",), "odd", -1)


# -- redundancy and equivalence ---------------------------------------------

def test_dominated_bound_removed():
    assert remove_redundant(system("x", (x, "<=", 1), (x, "<=", 2))).format() == ["x <= 1"]


def test_irredundant_rows_kept():
    s = system("xy", (x + y, "<=", 1), (x, "<=", 1), (y, "<=", 1))
    assert len(remove_redundant(s)) == 3


def test_implied_sum_removed():
    # x <= 1 and y <= 1 imply x + y <= 2
    s = system("xy", (x + y, "<=", 2), (x, "<=", 1), (y, "<=", 1))
    assert sorted(remove_redundant(s).format()) == ["x <= 1", "y <= 1"]


def test_redundant_equality_removed():
    s = system("xy", (x, "=", 1), (y, "=", 2), (x + y, "=", 3))
    assert len(remove_redundant(s)) == 2


def test_equivalence_examples():
    assert systems_equivalent(system("x", (x, "<=", 1)), system("x", (x * 2, "<=", 2)))
    assert not systems_equivalent(system("x", (x, "<=", 1)), system("x", (x, "<=", 2)))
    # variable order does not matter
    assert systems_equivalent(system("xy", (x - y, "<=", 0)), system("yx", (y - x, ">=", 0)))
    with pytest.raises(PolyhedronError):
        systems_equivalent(system("x", (x, "<=", 1)), system("y", (y, "<=", 1)))


def test_equivalence_with_empty_sets():
    empty = system("x", (x, ">=", 1), (x, "<=", 0))
    assert systems_equivalent(empty, system("x", (x * 0, "<=", -1)))
    assert not systems_equivalent(empty, system("x", (x, "<=", 0)))


def test_equality_vs_pair_of_inequalities():
    assert systems_equivalent(system("xy", (x + y, "=", 1)),
                              system("xy", (x + y, "<=", 1), (x + y, ">=", 1)))


# -- Fourier-Motzkin ---------------------------------------------------------

def test_transitive_combination():
    assert fm_eliminate(system("xy", (x, "<=", y), (y, "<=", 1)), ["y"]).format() == ["x <= 1"]


def test_empty_projection():
    out = fm_eliminate(system("xy", (y, ">=", 0), (y, "<=", -1)), ["y"])
    assert out.format() == ["0 <= -1"]
    assert out.variables == ("x",)


def test_equality_substitution():
    s = system("xyz", (x + y + z, "=", 1), (y, ">=", 0), (z, ">=", 0), (y, "<=", 1), (z, "<=", 1))
    out = fm_eliminate(s, ["y", "z"])
    assert systems_equivalent(out, system("x", (x, "<=", 1), (x, ">=", -1)))


def test_unknown_elimination_variable():
    with pytest.raises(PolyhedronError):
        fm_eliminate(system("x", (x, "<=", 1)), ["y"])


def test_unpruned_fm_agrees_with_pruned():
    s = system("xyz", (x + y + z, "<=", 1), (x - y, "<=", 1), (z - y, ">=", -2), (y, "<=", 3), (x + z, ">=", -4))
    assert systems_equivalent(fm_eliminate(s, ["y"], prune=False), fm_eliminate(s, ["y"]))


coef = st.integers(-3, 3)
rhs = st.fractions(min_value=-4, max_value=4, max_denominator=3)
row3 = st.tuples(st.tuples(coef, coef, coef), st.sampled_from([LE, LE, LE, EQ]), rhs)


@settings(max_examples=150, deadline=None)
@given(st.lists(row3, min_size=1, max_size=5))
def test_fm_two_variable_elimination_matches_brute_force(rows):
    assert fm_two_var_check(rows)


grid = st.fractions(min_value=-4, max_value=4, max_denominator=2)


@settings(max_examples=150, deadline=None)
@given(st.lists(row3, min_size=1, max_size=5), st.lists(st.tuples(grid, grid), min_size=5, max_size=15))
def test_fm_one_variable_elimination_matches_brute_force(rows, points):
    assert fm_one_var_check(rows, points)


def _lp_point(s, direction):
    eqs, ineqs = s.lp_constraints()
    res = lp_solve(LpProblem(LinearExpr(dict(zip(s.variables, direction))), tuple(eqs), tuple(ineqs)))
    return res.witness if res.status is LpStatus.OPTIMAL else None


@settings(max_examples=60, deadline=None)
@given(st.lists(row3, min_size=2, max_size=6), st.lists(st.tuples(coef, coef, coef), min_size=3, max_size=3))
def test_projection_soundness_and_completeness_via_lp(rows, directions):
    s = _random_system(rows)
    out = fm_eliminate(s, ["z"])
    for d in directions:
        p = _lp_point(s, d)
        if p is None:
            assert not out.feasible()
            return
        # soundness: a solution of the input restricted to (x, y) satisfies the output
        assert out.satisfied_by(p)
        q = _lp_point(out, d[:2])
        # completeness: a solution of the output extends to the input
        eqs, ineqs = s.lp_constraints()
        pins = [(LinearExpr.var(v), q[v]) for v in ("x", "y")]
        assert lp_feasible(list(eqs) + pins, ineqs)


@settings(max_examples=60, deadline=None)
@given(st.lists(row3, min_size=1, max_size=7))
def test_remove_redundant_preserves_solution_set(rows):
    s = _random_system(rows)
    pruned = remove_redundant(s)
    assert systems_equivalent(s, pruned)
    assert implies(s, pruned) and implies(pruned, s)
    # irredundant: dropping any remaining row changes the set
    if pruned.feasible():
        for k in range(len(pruned.rows)):
            rest = ConstraintSystem(pruned.variables, pruned.rows[:k] + pruned.rows[k + 1:])
            assert not systems_equivalent(rest, pruned)

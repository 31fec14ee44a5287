from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from contexture.lp import (LpError, LpProblem, LpStatus, lp_feasible, lp_solve,
                           solve_standard_form)
from contexture.rational import LinearExpr
from contexture.scenario import lg_scenario
from contexture.measures import proper_jpd_exists

from oracles import brute_min

x, y = LinearExpr.var("x"), LinearExpr.var("y")


def test_single_bound():
    res = lp_solve(LpProblem(x, inequalities=[(x, 3)]))
    assert res.status is LpStatus.OPTIMAL
    assert res.value == 3
    assert res.witness == {"x": 3}


def test_equality_fixes_objective():
    res = lp_solve(LpProblem(x + y, equalities=[(x + y, 1)], nonnegative={"x", "y"}))
    assert res.value == 1
    assert res.witness["x"] + res.witness["y"] == 1


def test_infeasible():
    res = lp_solve(LpProblem(x, inequalities=[(x, 1), (-x, 0)]))
    assert res.status is LpStatus.INFEASIBLE
    assert res.value is None and res.witness is None


def test_unbounded():
    res = lp_solve(LpProblem(-x, inequalities=[(x, 1)]))
    assert res.status is LpStatus.UNBOUNDED


def test_feasibility_examples():
    assert lp_feasible(inequalities=[(x, 0), (-x, -1)])
    assert not lp_feasible(inequalities=[(x, 1), (-x, 0)])


def test_proper_jpd_classical_lg():
    assert proper_jpd_exists(lg_scenario([1, 1, 1]))
    assert not proper_jpd_exists(lg_scenario([-1, -1, -1]))


def test_empty_problem_rejected():
    with pytest.raises(LpError):
        lp_solve(LpProblem(LinearExpr()))


def test_objective_variable_must_be_constrained():
    with pytest.raises(LpError):
        lp_solve(LpProblem(x + y, inequalities=[(x, 0)]))


def test_redundant_equalities():
    # rank-deficient equality system leaves an artificial basic at level zero
    res = lp_solve(LpProblem(x, equalities=[(x + y, 2), (x * 2 + y * 2, 4)],
                             nonnegative={"x", "y"}))
    assert res.value == 0
    assert res.witness == {"x": 0, "y": 2}


def test_degenerate_cycling_example():
    # Beale's example cycles under plain Dantzig pricing without anti-cycling
    A = [[Fraction(1, 4), -8, -1, 9, 1, 0, 0],
         [Fraction(1, 2), -12, Fraction(-1, 2), 3, 0, 1, 0],
         [0, 0, 1, 0, 0, 0, 1]]
    b = [0, 0, 1]
    c = [Fraction(-3, 4), 20, Fraction(-1, 2), 6, 0, 0, 0]
    res = solve_standard_form(A, b, c)
    assert res.status is LpStatus.OPTIMAL
    assert res.value == Fraction(-5, 4)


def test_deterministic_witness():
    problem = LpProblem(x + y, inequalities=[(x + y, 1)], nonnegative={"x", "y"})
    first = lp_solve(problem)
    for _ in range(3):
        assert lp_solve(problem) == first


small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.lists(small, min_size=n, max_size=n), min_size=0, max_size=4),
    st.lists(small, min_size=4, max_size=4),
    st.lists(small, min_size=n, max_size=n))))
def test_matches_vertex_enumeration(data):
    """Random bounded LPs: optimum equals the best vertex found by brute force."""
    n, rows, rhs, cost = data
    names = ["v%d" % k for k in range(n)]
    rows = [list(r) for r in rows]
    rhs = list(rhs[:len(rows)])
    # box -3 <= v <= 3 keeps everything bounded
    box_rows, box_rhs = [], []
    for k in range(n):
        e = [0] * n
        e[k] = 1
        box_rows += [e, [-v for v in e]]
        box_rhs += [3, 3]
    all_rows, all_rhs = rows + box_rows, rhs + box_rhs
    ineqs = []
    for r, b in zip(all_rows, all_rhs):
        # r.v <= b  as  -r.v >= -b
        ineqs.append((LinearExpr(dict(zip(names, (-a for a in r)))), -b))
    objective = LinearExpr(dict(zip(names, cost)))
    if not objective.coefficients:
        objective = LinearExpr.var(names[0])
        cost = [1] + [0] * (n - 1)
    res = lp_solve(LpProblem(objective, inequalities=ineqs))
    expected = brute_min(all_rows, all_rhs, cost)
    if expected is None:
        assert res.status is LpStatus.INFEASIBLE
    else:
        assert res.status is LpStatus.OPTIMAL
        assert res.value == expected

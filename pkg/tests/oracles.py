"""Brute-force reference computations used to cross-check the package.

They share no code with the solvers under test except the Fraction type
and the named-variable LP front end (where noted).
"""

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog


def solve_square(rows, rhs):
    """Exact Gaussian elimination; None if singular."""
    n = len(rows)
    m = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[k][n] / m[k][k] for k in range(n)]


def vertices(rows, rhs):
    """All vertices of {x : rows x <= rhs} (assumed bounded), by tight subsets."""
    n = len(rows[0])
    out = set()
    for subset in itertools.combinations(range(len(rows)), n):
        x = solve_square([rows[i] for i in subset], [rhs[i] for i in subset])
        if x is None:
            continue
        if all(sum(a * v for a, v in zip(r, x)) <= b for r, b in zip(rows, rhs)):
            out.add(tuple(x))
    return sorted(out)


def brute_min(rows, rhs, cost):
    """min cost.x over a bounded polyhedron, None when empty."""
    vs = vertices(rows, rhs)
    if not vs:
        return None
    return min(sum(c * v for c, v in zip(cost, x)) for x in vs)


def tables_cells(s, coords):
    """(coordinate pair, outcome pair, probability) for every cell of every table."""
    for (i, j), t in zip(coords, s.tables):
        for x, y in itertools.product((1, -1), repeat=2):
            yield i, j, x, y, t.prob(x, y)


def float_gamma(s):
    """Gamma_min with floating-point HiGHS on per-cell equalities."""
    props = list(s.properties)
    index = {p: k for k, p in enumerate(props)}
    coords = [(index[t.left.property], index[t.right.property]) for t in s.tables]
    atoms = list(itertools.product((1, -1), repeat=len(props)))
    a_eq, b_eq = [], []
    for i, j, x, y, p in tables_cells(s, coords):
        row = [1.0 if (w[i] == x and w[j] == y) else 0.0 for w in atoms]
        a_eq.append(row + [-v for v in row])
        b_eq.append(float(p))
    n = len(atoms)
    res = linprog(np.ones(2 * n), A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun - 1


def float_delta(s):
    """Delta_min with floating-point HiGHS over context-indexed copies."""
    copies = []
    coords = []
    for t in s.tables:
        coords.append((len(copies), len(copies) + 1))
        copies += [t.left.property, t.right.property]
    atoms = list(itertools.product((1, -1), repeat=len(copies)))
    pairs = [(a, b) for a, b in itertools.combinations(range(len(copies)), 2)
             if copies[a] == copies[b]]
    cost = [sum(1 for a, b in pairs if v[a] != v[b]) for v in atoms]
    a_eq, b_eq = [], []
    for i, j, x, y, p in tables_cells(s, coords):
        a_eq.append([1.0 if (v[i] == x and v[j] == y) else 0.0 for v in atoms])
        b_eq.append(float(p))
    res = linprog(np.array(cost, float), A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def exact_gamma_named(s):
    """Gamma_min through the named-variable LP front end with per-cell rows."""
    from contexture.lp import LpProblem, LpStatus, lp_solve
    from contexture.rational import LinearExpr

    props = list(s.properties)
    index = {p: k for k, p in enumerate(props)}
    coords = [(index[t.left.property], index[t.right.property]) for t in s.tables]
    atoms = list(itertools.product((1, -1), repeat=len(props)))
    pos = {w: f"p+{w}" for w in atoms}
    neg = {w: f"p-{w}" for w in atoms}
    eqs = []
    for i, j, x, y, p in tables_cells(s, coords):
        sel = [w for w in atoms if w[i] == x and w[j] == y]
        eqs.append((LinearExpr.total(pos[w] for w in sel) - LinearExpr.total(neg[w] for w in sel), p))
    names = list(pos.values()) + list(neg.values())
    res = lp_solve(LpProblem(LinearExpr.total(names), tuple(eqs), (), frozenset(names)))
    assert res.status is LpStatus.OPTIMAL
    return res.value - 1


def exact_delta_named(s):
    """Delta_min through the named-variable LP front end with per-cell rows."""
    from contexture.lp import LpProblem, LpStatus, lp_solve
    from contexture.rational import LinearExpr

    copies, coords = [], []
    for t in s.tables:
        coords.append((len(copies), len(copies) + 1))
        copies += [t.left.property, t.right.property]
    atoms = list(itertools.product((1, -1), repeat=len(copies)))
    names = {v: "l" + "".join("+" if b > 0 else "-" for b in v) for v in atoms}
    pairs = [(a, b) for a, b in itertools.combinations(range(len(copies)), 2)
             if copies[a] == copies[b]]
    objective = LinearExpr({names[v]: sum(1 for a, b in pairs if v[a] != v[b]) for v in atoms})
    eqs = []
    for i, j, x, y, p in tables_cells(s, coords):
        eqs.append((LinearExpr.total(names[v] for v in atoms if v[i] == x and v[j] == y), p))
    res = lp_solve(LpProblem(objective, tuple(eqs), (), frozenset(names.values())))
    assert res.status is LpStatus.OPTIMAL
    return res.value


def odd_signed_max(xs):
    """Reference signed maximum by sorting: flip the smallest |x| when parity needs it."""
    xs = [Fraction(x) for x in xs]
    total = sum(abs(x) for x in xs)
    negatives = sum(1 for x in xs if x < 0)
    return total if negatives % 2 == 1 else total - 2 * min(abs(x) for x in xs)

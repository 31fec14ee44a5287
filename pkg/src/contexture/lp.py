"""Exact two-phase simplex over the rationals.

Problems are stated with named variables (:class:`LpProblem`) and solved in
standard form ``min c.x  s.t.  A x = b, x >= 0`` by a revised simplex that
keeps an explicit basis inverse in ``gmpy2.mpq`` and the constraint matrix as
sparse columns. Results are converted back to :class:`fractions.Fraction`.

Pivoting is Dantzig's rule (lowest index on ties). After a run of degenerate
pivots the phase switches to Bland's rule for good, which rules out cycling.
Every choice is index-ordered, so a given problem always yields the same
basis and witness.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from gmpy2 import lcm, mpq

from .rational import LinearExpr, RationalLike, as_rational

__all__ = [
    "LpError", "LpStatus", "LpProblem", "LpResult",
    "lp_solve", "lp_feasible", "solve_standard_form",
]

# Consecutive degenerate pivots tolerated before falling back to Bland's rule.
_DEGENERATE_LIMIT = 40

# Magnitude below which int64 pricing cannot overflow.
_INT64_SAFE = 2 ** 62

# Witness self-check on every solve; the test suite turns this on.
VERIFY_WITNESSES = os.environ.get("CONTEXTURE_VERIFY_LP", "") not in ("", "0")


class LpError(ValueError):
    """Malformed linear program."""


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _to_mpq(q: Fraction):
    return mpq(q.numerator, q.denominator)


@dataclass(frozen=True)
class LpProblem:
    """Minimize ``objective`` subject to ``expr == rhs`` and ``expr >= rhs`` rows.

    Variables listed in ``nonnegative`` are bounded below by zero; every other
    variable is free.
    """

    objective: LinearExpr
    equalities: tuple = ()
    inequalities: tuple = ()
    nonnegative: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "equalities", tuple(
            (e, as_rational(r)) for e, r in self.equalities))
        object.__setattr__(self, "inequalities", tuple(
            (e, as_rational(r)) for e, r in self.inequalities))
        object.__setattr__(self, "nonnegative", frozenset(self.nonnegative))

    def variables(self) -> list[str]:
        """All variable names in first-appearance order, then sorted bounds-only names."""
        seen: dict[str, None] = {}
        for name in self.objective.variables():
            seen.setdefault(name)
        for expr, _ in self.equalities + self.inequalities:
            for name in expr.variables():
                seen.setdefault(name)
        for name in sorted(self.nonnegative):
            seen.setdefault(name)
        return list(seen)

    def validate(self) -> None:
        names = self.variables()
        if not names:
            raise LpError("linear program has no variables")
        constrained = set(self.nonnegative)
        for expr, _ in self.equalities + self.inequalities:
            constrained.update(expr.variables())
        loose = [n for n in self.objective.variables() if n not in constrained]
        if loose:
            raise LpError(f"objective variables appear in no constraint: {loose}")

    def violations(self, point: Mapping[str, RationalLike]) -> list[str]:
        bad = []
        for name in self.nonnegative:
            if as_rational(point.get(name, 0)) < 0:
                bad.append(f"{name} >= 0")
        for expr, rhs in self.equalities:
            if expr.evaluate(_defaulted(point, expr)) != rhs:
                bad.append(f"{expr!r} == {rhs}")
        for expr, rhs in self.inequalities:
            if expr.evaluate(_defaulted(point, expr)) < rhs:
                bad.append(f"{expr!r} >= {rhs}")
        return bad


def _defaulted(point, expr):
    return {n: point.get(n, 0) for n in expr.variables()}


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    value: Fraction | None = None
    witness: Mapping[str, Fraction] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class StandardFormResult:
    status: LpStatus
    value: object = None  # mpq
    x: list | None = None
    basis: list | None = None


def _mpq(v):
    return _to_mpq(v) if isinstance(v, Fraction) else mpq(v)


def solve_standard_form(A: Sequence[Sequence], b: Sequence, c: Sequence,
                        ) -> StandardFormResult:
    """Solve ``min c.x, A x = b, x >= 0`` exactly; ``A`` given as dense rows.

    Redundant equality rows are allowed.
    """
    n = len(c)
    columns = [[] for _ in range(n)]
    for i, row in enumerate(A):
        if len(row) != n:
            raise LpError("constraint row length does not match objective")
        for j, v in enumerate(row):
            if v:
                columns[j].append((i, _mpq(v)))
    return solve_sparse(columns, b, c)


def solve_sparse(columns: Sequence[Sequence[tuple]], b: Sequence, c: Sequence,
                 ) -> StandardFormResult:
    """Same as :func:`solve_standard_form` with ``A`` given column-wise.

    ``columns[j]`` lists the ``(row, value)`` nonzeros of column ``j``.
    """
    n = len(c)
    if n == 0:
        raise LpError("linear program has no variables")
    rhs = [_mpq(v) for v in b]
    flip = [v < 0 for v in rhs]
    cols = []
    for col in columns:
        # plain ints stay ints: int * mpq is exact and cheaper than converting
        col = [(i, v if type(v) is int else _mpq(v)) for i, v in col if v]
        if any(flip):
            col = [(i, -v if flip[i] else v) for i, v in col]
        cols.append(col)
    rhs = [-v if f else v for v, f in zip(rhs, flip)]
    return _Revised(cols, rhs, [_mpq(v) for v in c]).run()


class _Revised:
    """Revised simplex with an explicit dense basis inverse.

    Column ``n + i`` is the artificial of row ``i``. Artificials never re-enter
    once they leave; one that is stuck at zero on a redundant row stays basic
    and can never be picked by the ratio test.
    """

    def __init__(self, cols, rhs, cost):
        self.cols = cols
        self.n = n = len(cols)
        self.m = m = len(rhs)
        one, zero = mpq(1), mpq(0)
        self.basis = [n + i for i in range(m)]
        self.Binv = [[one if k == i else zero for k in range(m)] for i in range(m)]
        self.x = list(rhs)
        self.cost = cost
        # Crash basis: a column with a single positive entry covers its row.
        for j, col in enumerate(cols):
            if len(col) == 1:
                i, v = col[0]
                if v > 0 and self.basis[i] >= n:
                    self.basis[i] = j
                    self.Binv[i][i] = one / v
                    self.x[i] = rhs[i] / v
        self.A_int = None
        if all(v.denominator == 1 for col in cols for _, v in col):
            A = np.zeros((m, n), dtype=object)
            for j, col in enumerate(cols):
                for i, v in col:
                    A[i, j] = int(v)
            self.A_obj = A
            self.col_abs_max = max((sum(abs(int(v)) for _, v in col) for col in cols), default=0)
            if self.col_abs_max < _INT64_SAFE:
                self.A_int = A.astype(np.int64)

    def _key(self, i):
        # Tie-break order: artificials first (so they leave early), then by index.
        bv = self.basis[i]
        return bv - self.n - self.m if bv >= self.n else bv

    def _column(self, j):
        Binv = self.Binv
        alpha = []
        for row in Binv:
            s = 0
            for k, a in self.cols[j]:
                r = row[k]
                if r:
                    s += r * a
            alpha.append(s)
        return alpha

    def _pivot(self, r, s, alpha):
        Binv, x = self.Binv, self.x
        p = alpha[r]
        prow = Binv[r]
        if p != 1:
            inv = mpq(1) / p
            prow = [v * inv for v in prow]
            Binv[r] = prow
            x[r] = x[r] * inv
        xr = x[r]
        for i, a in enumerate(alpha):
            if i != r and a:
                row = Binv[i]
                Binv[i] = [u - a * v for u, v in zip(row, prow)]
                x[i] -= a * xr
        self.basis[r] = s

    def _price_integer(self, y, costs, bland):
        """Entering column from exactly scaled integer reduced costs.

        With ``L`` the lcm of the dual denominators, ``L * d = L * c - (L * y) A``
        is an integer vector with the same signs and ordering as ``d``. It is
        computed in int64 when a bound rules out overflow, else with Python
        ints. Basic columns have reduced cost exactly zero and are never picked.
        """
        L = 1
        for v in y:
            if v:
                L = lcm(L, v.denominator)
        L = int(L)
        Y = [int(v * L) for v in y]
        bound = max(map(abs, Y), default=0) * self.col_abs_max + L * max(map(abs, costs), default=0)
        if bound < _INT64_SAFE:
            d = L * np.asarray(costs, dtype=np.int64) - np.asarray(Y, dtype=np.int64) @ self.A_int
        else:
            d = np.asarray([L * c for c in costs], dtype=object) - np.asarray(Y, dtype=object).dot(self.A_obj)
        if bland:
            neg = np.flatnonzero(d < 0)
            return int(neg[0]) if len(neg) else -1
        s = int(np.argmin(d))
        return s if d[s] < 0 else -1

    def _iterate(self, costs):
        """Simplex pivots for column costs ``costs`` (length n + m).

        Returns False if the objective is unbounded below.
        """
        n, m = self.n, self.m
        cols = self.cols
        bland = False
        degenerate = 0
        int_costs = None
        if self.A_int is not None and all(
                getattr(c, "denominator", 1) == 1 for c in costs[:n]):
            int_costs = [int(c) for c in costs[:n]]
        while True:
            basic = set(self.basis)
            y = [0] * m
            for i, bv in enumerate(self.basis):
                cb = costs[bv]
                if cb:
                    for k, v in enumerate(self.Binv[i]):
                        if v:
                            y[k] += cb * v
            if int_costs is not None:
                s = self._price_integer(y, int_costs, bland)
            else:
                s = -1
                best = 0
                for j in range(n):
                    if j in basic:
                        continue
                    d = costs[j]
                    for k, a in cols[j]:
                        yk = y[k]
                        if yk:
                            d -= yk * a
                    if d < 0:
                        if bland:
                            s = j
                            break
                        if d < best:
                            best = d
                            s = j
            if s < 0:
                return True
            alpha = self._column(s)
            r = -1
            ratio = None
            for i, a in enumerate(alpha):
                if a > 0:
                    q = self.x[i] / a
                    if (ratio is None or q < ratio
                            or (q == ratio and self._key(i) < self._key(r))):
                        ratio, r = q, i
            if r < 0:
                return False
            if ratio == 0:
                degenerate += 1
                if degenerate > _DEGENERATE_LIMIT:
                    bland = True
            else:
                degenerate = 0
            self._pivot(r, s, alpha)

    def run(self) -> StandardFormResult:
        n = self.n
        zero = mpq(0)
        if any(bv >= n for bv in self.basis):
            self._iterate([0] * n + [1] * self.m)
            if any(self.x[i] for i, bv in enumerate(self.basis) if bv >= n):
                return StandardFormResult(LpStatus.INFEASIBLE)
            # Swap zero-level artificials for structural columns where possible.
            for i in range(self.m):
                if self.basis[i] < n:
                    continue
                basic = set(self.basis)
                row = self.Binv[i]
                for j in range(n):
                    if j in basic:
                        continue
                    if sum((row[k] * a for k, a in self.cols[j]), zero):
                        self._pivot(i, j, self._column(j))
                        break
        cost = self.cost
        if not self._iterate(cost + [0] * self.m):
            return StandardFormResult(LpStatus.UNBOUNDED)
        x = [zero] * n
        value = zero
        for i, bv in enumerate(self.basis):
            if bv < n:
                x[bv] = self.x[i]
                value += cost[bv] * self.x[i]
        return StandardFormResult(LpStatus.OPTIMAL, value, x, list(self.basis))


def _standardize(problem: LpProblem):
    names = problem.variables()
    positions: dict[str, tuple[int, int]] = {}
    ncols = 0
    for name in names:
        if name in problem.nonnegative:
            positions[name] = (ncols, -1)
            ncols += 1
        else:
            positions[name] = (ncols, ncols + 1)
            ncols += 2
    rows = problem.equalities + problem.inequalities
    columns: list[list] = [[] for _ in range(ncols + len(problem.inequalities))]
    b = []
    for i, (expr, rhs) in enumerate(rows):
        for name, coef in expr.items():
            pos, neg = positions[name]
            q = _to_mpq(coef)
            columns[pos].append((i, q))
            if neg >= 0:
                columns[neg].append((i, -q))
        b.append(_to_mpq(rhs - expr.constant))
    for k in range(len(problem.inequalities)):
        columns[ncols + k].append((len(problem.equalities) + k, mpq(-1)))
    c = [0] * len(columns)
    for name, coef in problem.objective.items():
        pos, neg = positions[name]
        c[pos] = _to_mpq(coef)
        if neg >= 0:
            c[neg] = -c[pos]
    return names, positions, columns, b, c


def lp_solve(problem: LpProblem, verify: bool | None = None) -> LpResult:
    """Minimize the problem's objective exactly.

    >>> x = LinearExpr.var("x")
    >>> lp_solve(LpProblem(x, inequalities=[(x, 3)])).value
    Fraction(3, 1)
    """
    problem.validate()
    names, positions, columns, b, c = _standardize(problem)
    res = solve_sparse(columns, b, c)
    if res.status is not LpStatus.OPTIMAL:
        return LpResult(res.status)
    witness = {}
    for name in names:
        pos, neg = positions[name]
        v = res.x[pos] - (res.x[neg] if neg >= 0 else 0)
        witness[name] = _to_fraction(v)
    value = _to_fraction(res.value) + problem.objective.constant
    if VERIFY_WITNESSES if verify is None else verify:
        bad = problem.violations(witness)
        if bad or problem.objective.evaluate(witness) != value:
            raise AssertionError(f"simplex witness check failed: {bad[:3]}")
    return LpResult(LpStatus.OPTIMAL, value, witness)


def lp_feasible(equalities: Iterable = (), inequalities: Iterable = (),
                nonnegative: Iterable[str] = ()) -> bool:
    """True iff the constraint set (zero objective) has a solution."""
    equalities = tuple(equalities)
    inequalities = tuple(inequalities)
    names: dict[str, None] = {}
    for expr, _ in equalities + inequalities:
        for name in expr.variables():
            names.setdefault(name)
    for name in sorted(nonnegative):
        names.setdefault(name)
    if not names:
        # No variables: every row is a constant comparison.
        return (all(e.constant == as_rational(r) for e, r in equalities)
                and all(e.constant >= as_rational(r) for e, r in inequalities))
    problem = LpProblem(LinearExpr(), equalities, inequalities, frozenset(nonnegative))
    return lp_solve(problem).status is LpStatus.OPTIMAL

"""Linear constraint systems, Fourier-Motzkin projection and LP-certified redundancy.

A :class:`ConstraintSystem` is a conjunction of rows ``coeffs . vars <= rhs``
or ``coeffs . vars = rhs`` over an ordered tuple of variable names. Rows are
kept canonical: integer coefficients with gcd 1 (an equality additionally has
a positive leading coefficient), so duplicates are recognised syntactically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .lp import LpStatus, lp_feasible, solve_sparse
from .rational import LinearExpr, RationalLike, as_rational

LE = "<="
EQ = "="


class PolyhedronError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    coeffs: tuple  # ints aligned with the owning system's variables
    rel: str
    rhs: Fraction

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def _canonical(coeffs: Sequence[RationalLike], rel: str, rhs: RationalLike) -> Row | None:
    """Scale to coprime integer coefficients; None for a vacuous row.

    An all-zero row that cannot hold becomes the canonical ``0 <= -1``.
    """
    coeffs = [as_rational(c) for c in coeffs]
    rhs = as_rational(rhs)
    if rel not in (LE, EQ):
        raise PolyhedronError(f"unknown relation {rel!r}")
    if not any(coeffs):
        ok = rhs >= 0 if rel == LE else rhs == 0
        return None if ok else Row(tuple(0 for _ in coeffs), LE, Fraction(-1))
    den = lcm(*(c.denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    g = 0
    for v in ints:
        g = gcd(g, v)
    scale = Fraction(den, g)
    if rel == EQ and next(v for v in ints if v) < 0:
        scale = -scale
        g = -g
    return Row(tuple(v // g for v in ints), rel, rhs * scale)


class ConstraintSystem:
    """Immutable conjunction of canonical rows over ordered variables."""

    __slots__ = ("variables", "rows", "_index")

    def __init__(self, variables: Sequence[str], rows: Iterable[Row] = ()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise PolyhedronError("duplicate variable names")
        kept: dict = {}
        infeasible = False
        for row in rows:
            if len(row.coeffs) != len(variables):
                raise PolyhedronError("row width does not match variables")
            canon = _canonical(row.coeffs, row.rel, row.rhs)
            if canon is None:
                continue
            if canon.is_zero():
                infeasible = True
                continue
            key = (canon.coeffs, canon.rel)
            prev = kept.get(key)
            if prev is None:
                kept[key] = canon
            elif canon.rel == LE:
                if canon.rhs < prev.rhs:
                    kept[key] = canon
            elif canon.rhs != prev.rhs:
                infeasible = True
        out = list(kept.values())
        if infeasible:
            out.append(Row(tuple(0 for _ in variables), LE, Fraction(-1)))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "rows", tuple(out))
        object.__setattr__(self, "_index", {v: k for k, v in enumerate(variables)})

    def __setattr__(self, name, value):
        raise AttributeError("ConstraintSystem is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def build(cls, variables: Sequence[str], constraints: Iterable[tuple]) -> "ConstraintSystem":
        """From ``(lhs, rel, rhs)`` triples; rel is ``"<="``, ``">="`` or ``"="``.

        ``lhs`` is a LinearExpr, ``rhs`` a rational or LinearExpr; variables end up
        on the left and constants on the right.
        """
        variables = tuple(variables)
        index = {v: k for k, v in enumerate(variables)}
        rows = []
        for expr, rel, rhs in constraints:
            if isinstance(rhs, LinearExpr):
                expr, rhs = expr - rhs, 0
            rhs = as_rational(rhs) - expr.constant
            coeffs = [Fraction(0)] * len(variables)
            for name, c in expr.items():
                if name not in index:
                    raise PolyhedronError(f"row uses unknown variable {name!r}")
                coeffs[index[name]] = c
            if rel == ">=":
                coeffs = [-c for c in coeffs]
                rhs = -rhs
                rel = LE
            rows.append(Row(tuple(coeffs), rel, rhs))
        return cls(variables, rows)

    def with_rows(self, rows: Iterable[Row]) -> "ConstraintSystem":
        return ConstraintSystem(self.variables, list(self.rows) + list(rows))

    def union(self, other: "ConstraintSystem") -> "ConstraintSystem":
        variables = list(self.variables) + [v for v in other.variables if v not in self._index]
        return ConstraintSystem(variables, self.lift(variables).rows + other.lift(variables).rows)

    def lift(self, variables: Sequence[str]) -> "ConstraintSystem":
        """Same rows over a superset (or reordering) of the variables."""
        variables = tuple(variables)
        index = {v: k for k, v in enumerate(variables)}
        missing = [v for v in self.variables if v not in index]
        if missing:
            raise PolyhedronError(f"cannot drop variables {missing}")
        rows = []
        for row in self.rows:
            coeffs = [0] * len(variables)
            for name, c in zip(self.variables, row.coeffs):
                coeffs[index[name]] = c
            rows.append(Row(tuple(coeffs), row.rel, row.rhs))
        return ConstraintSystem(variables, rows)

    # inspection --------------------------------------------------------

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __repr__(self):
        return f"ConstraintSystem({len(self.variables)} vars, {len(self.rows)} rows)"

    def expr(self, row: Row) -> LinearExpr:
        return LinearExpr(dict(zip(self.variables, row.coeffs)))

    def is_trivially_infeasible(self) -> bool:
        return any(r.is_zero() for r in self.rows)

    def satisfied_by(self, point: Mapping[str, RationalLike]) -> bool:
        return not self.violated_rows(point)

    def violated_rows(self, point: Mapping[str, RationalLike]) -> list[Row]:
        values = [as_rational(point[v]) for v in self.variables]
        bad = []
        for row in self.rows:
            lhs = sum((c * x for c, x in zip(row.coeffs, values) if c), Fraction(0))
            if (row.rel == LE and lhs > row.rhs) or (row.rel == EQ and lhs != row.rhs):
                bad.append(row)
        return bad

    def uses(self, name: str) -> bool:
        k = self._index[name]
        return any(r.coeffs[k] for r in self.rows)

    def lp_constraints(self):
        """(equalities, inequalities) in :class:`~contexture.lp.LpProblem` form (``expr >= rhs``)."""
        eqs, ineqs = [], []
        for row in self.rows:
            expr = self.expr(row)
            if row.rel == EQ:
                eqs.append((expr, row.rhs))
            else:
                ineqs.append((-expr, -row.rhs))
        return eqs, ineqs

    def feasible(self) -> bool:
        if self.is_trivially_infeasible():
            return False
        if not self.rows:
            return True
        eqs, ineqs = self.lp_constraints()
        return lp_feasible(eqs, ineqs)

    def format_row(self, row: Row) -> str:
        terms = []
        for name, c in zip(self.variables, row.coeffs):
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = name if mag == 1 else f"{mag}*{name}"
            terms.append((sign, body))
        if not terms:
            text = "0"
        else:
            first_sign, first = terms[0]
            text = ("-" if first_sign == "-" else "") + first
            for sign, body in terms[1:]:
                text += f" {sign} {body}"
        rel = "<=" if row.rel == LE else "="
        return f"{text} {rel} {row.rhs}"

    def format(self) -> list[str]:
        return [self.format_row(r) for r in self.rows]

    def sorted(self) -> "ConstraintSystem":
        """Rows in a canonical order (for reproducible output)."""
        rows = sorted(self.rows, key=lambda r: (r.rel, tuple(-c for c in r.coeffs), r.rhs))
        return ConstraintSystem(self.variables, rows)


def infeasible_system(variables: Sequence[str]) -> ConstraintSystem:
    return ConstraintSystem(variables, [Row(tuple(0 for _ in variables), LE, Fraction(-1))])


# -- signed maxima -----------------------------------------------------------

@dataclass(frozen=True)
class SignedMax:
    """``scale * s_parity(terms)``: maximum of +/-t1 +/- ... over sign vectors of a parity."""

    terms: tuple
    parity: str
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "scale", as_rational(self.scale))
        if not self.terms:
            raise PolyhedronError("signed maximum needs at least one term")
        if self.parity not in ("even", "odd"):
            raise PolyhedronError("parity must be 'even' or 'odd'")
        if self.scale <= 0:
            raise PolyhedronError("a maximum can only be bounded above with a positive weight")

    def sign_vectors(self):
        want = 0 if self.parity == "even" else 1
        for signs in itertools.product((1, -1), repeat=len(self.terms)):
            if signs.count(-1) % 2 == want:
                yield signs


@dataclass(frozen=True)
class SignedMaxSpec:
    """``s_parity(terms) + sum(extra maxima) <= bound_expr``.

    A parity maximum is only linear when it is bounded from above, so every
    maximum sits on the small side. ``extra`` carries further maxima moved
    across from the bound, e.g. ``s0(x) <= 6 - s1(y)`` is
    ``SignedMaxSpec(x, "even", 6, extra=(SignedMax(y, "odd"),))``.
    """

    terms: tuple
    parity: str
    bound_expr: LinearExpr
    extra: tuple = ()
    scale: Fraction = Fraction(1)

    def maxima(self) -> list[SignedMax]:
        return [SignedMax(self.terms, self.parity, self.scale), *self.extra]


def expand_signed_max(spec: SignedMaxSpec, variables: Sequence[str] | None = None) -> ConstraintSystem:
    """One linear row per combination of admissible sign vectors."""
    bound = spec.bound_expr if isinstance(spec.bound_expr, LinearExpr) else LinearExpr.const(spec.bound_expr)
    maxima = spec.maxima()
    if variables is None:
        seen: dict[str, None] = {}
        for mx in maxima:
            for t in mx.terms:
                seen.setdefault(t)
        for name in bound.variables():
            seen.setdefault(name)
        variables = tuple(seen)
    constraints = []
    for combo in itertools.product(*(list(mx.sign_vectors()) for mx in maxima)):
        expr = -bound
        for mx, signs in zip(maxima, combo):
            expr = expr + _sum_signed(mx.terms, signs, mx.scale)
        constraints.append((expr, LE, 0))
    return ConstraintSystem.build(variables, constraints)


def _sum_signed(terms, signs, scale) -> LinearExpr:
    coeffs: dict[str, Fraction] = {}
    for t, sg in zip(terms, signs):
        coeffs[t] = coeffs.get(t, Fraction(0)) + sg * scale
    return LinearExpr(coeffs)



# -- implication -------------------------------------------------------------

def _implication_value(rows: Sequence[Row], target: Sequence[int]):
    """max target.x over the rows, via the dual ``min h.y, G^T y = target, y >= 0``.

    Equality rows get a free dual variable (two columns). Returns None when the
    dual is infeasible, i.e. the maximum is unbounded (assuming the rows are
    feasible). Right-hand sides are scaled to integers so pricing stays on
    the integer path; the optimum is scaled back.
    """
    den = 1
    for r in rows:
        den = lcm(den, r.rhs.denominator)
    columns, cost = [], []
    for r in rows:
        col = [(k, c) for k, c in enumerate(r.coeffs) if c]
        h = int(r.rhs * den)
        columns.append(col)
        cost.append(h)
        if r.rel == EQ:
            columns.append([(k, -c) for k, c in col])
            cost.append(-h)
    if not columns:
        return Fraction(0) if not any(target) else None
    res = solve_sparse(columns, list(target), cost)
    if res.status is LpStatus.INFEASIBLE:
        return None
    if res.status is LpStatus.UNBOUNDED:
        raise AssertionError("implication dual unbounded: the constraint rows are infeasible")
    return Fraction(int(res.value.numerator), int(res.value.denominator) * den)


def _implied_le(rows: Sequence[Row], coeffs: Sequence[int], rhs: Fraction) -> bool:
    best = _implication_value(rows, coeffs)
    return best is not None and best <= rhs


def row_implied(rows: Sequence[Row], row: Row) -> bool:
    """Is ``row`` implied by the (feasible) ``rows``?"""
    if row.is_zero():
        return row.rhs >= 0 if row.rel == LE else row.rhs == 0
    if not _implied_le(rows, row.coeffs, row.rhs):
        return False
    if row.rel == EQ:
        return _implied_le(rows, tuple(-c for c in row.coeffs), -row.rhs)
    return True


def implies(system: ConstraintSystem, other: ConstraintSystem) -> bool:
    """Every row of ``other`` holds on ``system`` (same variable set)."""
    other = other.lift(system.variables)
    if not system.feasible():
        return True
    return all(row_implied(system.rows, r) for r in other.rows)


def remove_redundant(system: ConstraintSystem) -> ConstraintSystem:
    """Drop rows implied by the remaining ones; each drop is certified by an LP.

    Rows are visited last to first, so earlier rows win ties between
    mutually redundant duplicates.
    """
    if not system.feasible():
        return infeasible_system(system.variables)
    rows = list(system.rows)
    k = len(rows) - 1
    while k >= 0:
        others = rows[:k] + rows[k + 1:]
        if row_implied(others, rows[k]):
            rows = others
        k -= 1
    return ConstraintSystem(system.variables, rows)


def systems_equivalent(a: ConstraintSystem, b: ConstraintSystem) -> bool:
    if set(a.variables) != set(b.variables):
        raise PolyhedronError("systems are over different variables")
    return implies(a, b) and implies(b, a)


# -- Fourier-Motzkin ---------------------------------------------------------

def _substitute(rows: list[Row], eq: Row, k: int) -> list[Row]:
    """Eliminate column ``k`` from ``rows`` using equality ``eq``."""
    a = eq.coeffs[k]
    out = []
    for r in rows:
        c = r.coeffs[k]
        if not c:
            out.append(r)
            continue
        # r - (c / a) * eq, scaled by |a| to stay integral
        f = Fraction(c, a)
        coeffs = tuple(x - f * y for x, y in zip(r.coeffs, eq.coeffs))
        out.append(Row(coeffs, r.rel, r.rhs - f * eq.rhs))
    return out


def _combine(pos: Row, neg: Row, k: int) -> Row:
    p, q = pos.coeffs[k], -neg.coeffs[k]
    coeffs = tuple(q * x + p * y for x, y in zip(pos.coeffs, neg.coeffs))
    return Row(coeffs, LE, q * pos.rhs + p * neg.rhs)


def fm_eliminate(system: ConstraintSystem, names: Sequence[str],
                 prune: bool = True) -> ConstraintSystem:
    """Project ``system`` onto the variables not in ``names``.

    Variables are removed in the given order. A variable occurring in an
    equality is substituted out with the first such equality; otherwise every
    row with a positive coefficient is combined with every row with a negative
    one. After each variable the intermediate system is pruned with
    :func:`remove_redundant` (disable with ``prune=False``).
    """
    for name in names:
        if name not in system.variables:
            raise PolyhedronError(f"cannot eliminate unknown variable {name!r}")
    current = system
    for name in names:
        k = current.variables.index(name)
        rows = list(current.rows)
        eq = next((r for r in rows if r.rel == EQ and r.coeffs[k]), None)
        if eq is not None:
            rest = [r for r in rows if r is not eq]
            new_rows = _substitute(rest, eq, k)
        else:
            pos = [r for r in rows if r.coeffs[k] > 0]
            neg = [r for r in rows if r.coeffs[k] < 0]
            new_rows = [r for r in rows if not r.coeffs[k]]
            new_rows.extend(_combine(p, q, k) for p in pos for q in neg)
        keep = [v for v in current.variables if v != name]
        stripped = [Row(r.coeffs[:k] + r.coeffs[k + 1:], r.rel, r.rhs) for r in new_rows]
        current = ConstraintSystem(keep, stripped)
        if prune:
            current = remove_redundant(current)
    return current

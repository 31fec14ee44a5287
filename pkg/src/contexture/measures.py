"""Contextuality measures: minimal quasi-probability mass and minimal coupling mismatch.

``gamma_min_lp`` looks for a signed joint distribution over one +/-1 value per
property whose pairwise marginals are the observed tables, minimizing its
total variation ``M = sum |mu(w)|``; the measure is ``M - 1``.

``delta_min_lp`` looks for a proper joint distribution over the
context-indexed copies of every property (a coupling of the observed tables)
minimizing the summed probability that two copies of the same property
disagree.

Both LPs are solved exactly and return a witness that is re-checked against
the observed tables before anything is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .lp import LpStatus, lp_feasible, solve_sparse
from .rational import LinearExpr, RationalLike, as_rational
from .scenario import (ContextualVariableId, Kind, Scenario, UnsupportedKind,
                       require_no_signaling)


class MeasureError(RuntimeError):
    """A witness failed its own invariants or an LP returned the impossible."""


def _sign_string(w: Sequence[int]) -> str:
    return "".join("+" if v > 0 else "-" for v in w)


def _marginal_counts(coords_of_table, atoms) -> dict:
    """(table index, x, y) -> summed mass, visiting nonzero atoms only."""
    counts: dict = {}
    for w, v in atoms.items():
        if not v:
            continue
        for k, (i, j) in enumerate(coords_of_table):
            key = (k, w[i], w[j])
            counts[key] = counts.get(key, 0) + v
    return counts


def _check_tables(s: Scenario, coords_of_table, atoms, what: str) -> None:
    counts = _marginal_counts(coords_of_table, atoms)
    for k, t in enumerate(s.tables):
        for x, y in itertools.product((1, -1), repeat=2):
            if counts.get((k, x, y), 0) != t.prob(x, y):
                raise MeasureError(f"{what} misses table {t.context!r} at ({x:+d}, {y:+d})")


@dataclass(frozen=True)
class QuasiDistribution:
    properties: tuple
    atoms: Mapping[tuple, Fraction]  # +/-1 vector over ``properties`` -> mu(w)
    mass: Fraction

    def check(self, s: Scenario) -> None:
        if sum(self.atoms.values()) != 1:
            raise MeasureError("quasi-distribution does not sum to 1")
        if sum(abs(v) for v in self.atoms.values()) != self.mass:
            raise MeasureError("stored mass differs from sum of |mu|")
        index = {p: k for k, p in enumerate(self.properties)}
        coords = [(index[t.left.property], index[t.right.property]) for t in s.tables]
        _check_tables(s, coords, self.atoms, "quasi-distribution")

    def as_strings(self) -> dict[str, Fraction]:
        return {_sign_string(w): v for w, v in self.atoms.items() if v}


@dataclass(frozen=True)
class Coupling:
    variables: tuple  # ContextualVariableId per coordinate
    atoms: Mapping[tuple, Fraction]
    delta: Fraction

    def check(self, s: Scenario) -> None:
        if any(v < 0 for v in self.atoms.values()):
            raise MeasureError("coupling has a negative mass")
        if sum(self.atoms.values()) != 1:
            raise MeasureError("coupling does not sum to 1")
        index = {v: k for k, v in enumerate(self.variables)}
        coords = [(index[t.left], index[t.right]) for t in s.tables]
        _check_tables(s, coords, self.atoms, "coupling")
        if mismatch_total(self.variables, self.atoms) != self.delta:
            raise MeasureError("stored delta differs from mismatch probability of the atoms")

    def as_strings(self) -> dict[str, Fraction]:
        return {_sign_string(v): p for v, p in self.atoms.items() if p}


@dataclass(frozen=True)
class MeasureResult:
    value: Fraction
    witness: object
    closed_form: Fraction | None = None
    agree: bool | None = None
    # Set when a property sits in 3+ contexts and delta sums over all copy pairs.
    extended_delta: bool = False


def connection_pairs(variables: Sequence[ContextualVariableId]) -> list[tuple[int, int]]:
    """Index pairs of copies of the same property, grouped by property."""
    by_prop: dict[str, list[int]] = {}
    for k, v in enumerate(variables):
        by_prop.setdefault(v.property, []).append(k)
    pairs = []
    for idx in by_prop.values():
        pairs.extend(itertools.combinations(idx, 2))
    return pairs


def mismatch_total(variables, atoms) -> Fraction:
    pairs = connection_pairs(variables)
    total = Fraction(0)
    for a, p in atoms.items():
        if p:
            total += p * sum(1 for i, j in pairs if a[i] != a[j])
    return total


def _marginal_system(n_coords: int, coords_of_table, marginals: dict, s: Scenario):
    """Full-rank equality rows over the atoms of {+1,-1}^n_coords.

    Rows: total mass 1; P[coord = +1] for every coordinate with a known
    marginal; P[left = +1, right = +1] for every table. With no-signaling these
    pin down every observed table, and the rows are linearly independent.
    Returns (atoms, sparse columns, rhs).
    """
    rhs = [Fraction(1)]
    marginal_row = {}
    for k in range(n_coords):
        if k in marginals:
            marginal_row[k] = len(rhs)
            rhs.append(marginals[k])
    table_row = []
    for (i, j), t in zip(coords_of_table, s.tables):
        table_row.append(len(rhs))
        rhs.append(t.prob(1, 1))
    atoms = list(itertools.product((1, -1), repeat=n_coords))
    columns = []
    for w in atoms:
        col = [0]
        for k, r in marginal_row.items():
            if w[k] > 0:
                col.append(r)
        for (i, j), r in zip(coords_of_table, table_row):
            if w[i] > 0 and w[j] > 0:
                col.append(r)
        columns.append(col)
    return atoms, columns, rhs


def _solve(columns, rhs, cost, what):
    res = solve_sparse(columns, rhs, cost)
    if res.status is not LpStatus.OPTIMAL:
        raise MeasureError(f"{what} LP is {res.status.value}")
    return [_frac(v) for v in res.x], _frac(res.value)


_ZERO = Fraction(0)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator)) if q else _ZERO


def gamma_min_lp(s: Scenario) -> MeasureResult:
    """Minimal L1 mass of a signed joint reproducing the tables, minus one.

    mu(w) is split as p+(w) - p-(w) with both parts nonnegative.
    """
    require_no_signaling(s)
    props = s.properties
    index = {p: k for k, p in enumerate(props)}
    coords = [(index[t.left.property], index[t.right.property]) for t in s.tables]
    marginals = {}
    for t, (i, j) in zip(s.tables, coords):
        marginals.setdefault(i, t.marginal(t.left.property))
        marginals.setdefault(j, t.marginal(t.right.property))
    atoms, columns, rhs = _marginal_system(len(props), coords, marginals, s)
    split = []
    for col in columns:
        split.append([(r, 1) for r in col])
        split.append([(r, -1) for r in col])
    x, value = _solve(split, rhs, [1] * len(split), "quasi-probability")
    mu = {w: x[2 * k] - x[2 * k + 1] for k, w in enumerate(atoms)}
    mass = sum(abs(v) for v in mu.values())
    if mass != value:
        raise MeasureError("L1 mass of the witness differs from the LP optimum")
    witness = QuasiDistribution(props, mu, mass)
    witness.check(s)
    return _result(s, mass - 1, witness)


def delta_min_lp(s: Scenario) -> MeasureResult:
    """Minimal total mismatch probability over couplings of the observed tables."""
    require_no_signaling(s)
    variables = tuple(s.contextual_variables())
    coords = [(2 * k, 2 * k + 1) for k in range(len(s.tables))]
    marginals = {}
    for t, (i, j) in zip(s.tables, coords):
        marginals[i] = t.marginal(t.left.property)
        marginals[j] = t.marginal(t.right.property)
    atoms, columns, rhs = _marginal_system(len(variables), coords, marginals, s)
    pairs = connection_pairs(variables)
    cost = [sum(1 for i, j in pairs if a[i] != a[j]) for a in atoms]
    x, value = _solve([[(r, 1) for r in col] for col in columns], rhs, cost, "coupling")
    lam = dict(zip(atoms, x))
    witness = Coupling(variables, lam, value)
    witness.check(s)
    extended = any(len(s.contexts_of(p)) > 2 for p in s.properties)
    return _result(s, value, witness, extended)


def _result(s, value, witness, extended=False) -> MeasureResult:
    if value < 0:
        raise MeasureError(f"negative measure {value}")
    closed = _closed_form_or_none(s)
    agree = None if closed is None else closed == value
    return MeasureResult(value, witness, closed, agree, extended)


def _closed_form_or_none(s: Scenario):
    if s.kind is Kind.GENERIC:
        return None
    return gamma_min_formula(s)


def proper_jpd_exists(s: Scenario) -> bool:
    """Is there a nonnegative joint of the properties with the observed pair marginals?

    Stated with one equality per table cell through the named-variable LP
    interface, independently of the reduced row set the measures use.
    """
    props = s.properties
    index = {p: k for k, p in enumerate(props)}
    atoms = list(itertools.product((1, -1), repeat=len(props)))
    names = {w: f"p[{_sign_string(w)}]" for w in atoms}
    rows = []
    for t in s.tables:
        i, j = index[t.left.property], index[t.right.property]
        for x, y in itertools.product((1, -1), repeat=2):
            expr = LinearExpr.total(names[w] for w in atoms if w[i] == x and w[j] == y)
            rows.append((expr, t.prob(x, y)))
    return lp_feasible(equalities=rows, nonnegative=names.values())


# -- closed forms ------------------------------------------------------------

def s_signed_max(values: Sequence[RationalLike], parity: str) -> Fraction:
    """Maximum of +/-x1 +/- ... +/- xn over sign vectors with an even/odd number of minuses."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    xs = [as_rational(v) for v in values]
    if not xs:
        raise ValueError("signed maximum of an empty list")
    want = 0 if parity == "even" else 1
    best = None
    for signs in itertools.product((1, -1), repeat=len(xs)):
        if signs.count(-1) % 2 != want:
            continue
        total = sum((sg * x for sg, x in zip(signs, xs)), Fraction(0))
        if best is None or total > best:
            best = total
    return best


def _require(s: Scenario, kind: Kind):
    if s.kind is not kind:
        raise UnsupportedKind(f"expected a {kind.value} scenario, got {s.kind.value}")


def s_lg(s: Scenario) -> Fraction:
    _require(s, Kind.LEGGETT_GARG)
    return s_signed_max(s.correlations(), "odd")


def s_chsh(s: Scenario) -> Fraction:
    _require(s, Kind.EPR_BELL)
    return s_signed_max(s.correlations(), "odd")


def s_value(s: Scenario) -> Fraction | None:
    if s.kind is Kind.LEGGETT_GARG:
        return s_lg(s)
    if s.kind is Kind.EPR_BELL:
        return s_chsh(s)
    return None


def gamma_from_s(kind: Kind, s_val: RationalLike) -> Fraction:
    s_val = as_rational(s_val)
    if kind is Kind.LEGGETT_GARG:
        return max(Fraction(0), Fraction(-1, 2) + s_val / 2)
    if kind is Kind.EPR_BELL:
        return max(Fraction(0), s_val / 2 - 1)
    raise UnsupportedKind(f"no closed form for {kind.value} scenarios")


def gamma_min_formula(s: Scenario) -> Fraction:
    if s.kind is Kind.GENERIC:
        raise UnsupportedKind("no closed form for generic scenarios")
    return gamma_from_s(s.kind, s_value(s))


def delta_min_formula(s: Scenario) -> Fraction:
    # Same expression as gamma for both shapes.
    if s.kind is Kind.GENERIC:
        raise UnsupportedKind("no closed form for generic scenarios")
    return gamma_from_s(s.kind, s_value(s))

"""Bounds on the coupling mismatch from the connection-correlation system.

Variable names used in the constraint systems:

* ``A1B1`` (``Q1Q2``, ...): observed pair correlation of a context;
* ``A1`` (``Q1``, ...): marginal expectation of a property;
* ``cA1`` (``cQ1``, ...): correlation between the two context copies of a
  property, e.g. ``cA1 = <A1@11 * A1@12>``;
* ``Delta``: total mismatch probability over all connections.

A coupling is consistent with the observed tables iff the connection
correlations satisfy the two signed-max families (observed terms of one
parity, connection terms of the other) plus the trivial per-table bounds.
Eliminating the connection correlations together with
``Delta = n/2 - (1/2) sum c`` gives bounds on Delta in terms of observables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lp import LpProblem, LpStatus, lp_solve, solve_sparse
from .polyhedra import (EQ, ConstraintSystem, SignedMax, SignedMaxSpec,
                        expand_signed_max, fm_eliminate,
                        systems_equivalent)
from .rational import LinearExpr, format_rational
from .rng import SplitMix64
from .scenario import (ContextualVariableId, ExpectationVector, Kind, UnsupportedKind,
                       standard_pairs)

DELTA = "Delta"


@dataclass(frozen=True)
class Layout:
    """Names for one supported shape."""

    kind: Kind
    pairs: dict            # context -> (left, right)
    properties: tuple
    cycle_bound: int       # right-hand side of the signed-max families

    def obs(self, context: str) -> str:
        left, right = self.pairs[context]
        return left + right

    @property
    def observed(self) -> list[str]:
        return [self.obs(c) for c in self.pairs]

    @property
    def marginals(self) -> list[str]:
        return list(self.properties)

    @property
    def connections(self) -> list[str]:
        return ["c" + p for p in self.properties]

    def copies(self) -> list[ContextualVariableId]:
        out = []
        for context, (left, right) in self.pairs.items():
            out.append(ContextualVariableId(left, context))
            out.append(ContextualVariableId(right, context))
        return out

    def copy_pairs(self) -> dict[str, tuple[ContextualVariableId, ContextualVariableId]]:
        by_prop: dict[str, list] = {}
        for cv in self.copies():
            by_prop.setdefault(cv.property, []).append(cv)
        return {p: tuple(by_prop[p]) for p in self.properties}

    @property
    def expectation_variables(self) -> list[str]:
        return self.observed + self.connections + self.marginals

    @property
    def delta_variables(self) -> list[str]:
        return [DELTA] + self.observed + self.marginals


def layout(kind: Kind) -> Layout:
    if kind is Kind.EPR_BELL:
        return Layout(kind, standard_pairs(kind), ("A1", "A2", "B1", "B2"), 6)
    if kind is Kind.LEGGETT_GARG:
        return Layout(kind, standard_pairs(kind), ("Q1", "Q2", "Q3"), 4)
    raise UnsupportedKind(f"no derivation for {kind.value} scenarios")


# -- the connection system ---------------------------------------------------

def cycle_rows(kind: Kind) -> ConstraintSystem:
    """Both signed-max families: s_p(observed) + s_q(connections) <= bound, p != q."""
    lay = layout(kind)
    variables = lay.expectation_variables
    out = ConstraintSystem(variables)
    for obs_parity, conn_parity in (("even", "odd"), ("odd", "even")):
        spec = SignedMaxSpec(tuple(lay.observed), obs_parity, LinearExpr.const(lay.cycle_bound),
                             extra=(SignedMax(tuple(lay.connections), conn_parity),))
        out = out.with_rows(expand_signed_max(spec, variables).rows)
    return out


def _pair_bounds(corr: str, m1: str, m2: str):
    c, a, b = LinearExpr.var(corr), LinearExpr.var(m1), LinearExpr.var(m2)
    return [(c - a - b, ">=", -1), (c + a + b, ">=", -1),
            (c + a - b, "<=", 1), (c - a + b, "<=", 1)]


def trivial_rows(kind: Kind, include_connections: bool = True) -> ConstraintSystem:
    """``-1 + |m1 + m2| <= corr <= 1 - |m1 - m2|`` for every observed and connection pair.

    For a connection both copies share one marginal, so the two upper bounds
    collapse to ``corr <= 1`` (three rows instead of four).
    """
    lay = layout(kind)
    constraints = []
    for context, (left, right) in lay.pairs.items():
        constraints += _pair_bounds(lay.obs(context), left, right)
    if include_connections:
        for prop, conn in zip(lay.properties, lay.connections):
            constraints += _pair_bounds(conn, prop, prop)
    return ConstraintSystem.build(lay.expectation_variables, constraints)


def build_connection_system(kind: Kind) -> ConstraintSystem:
    return cycle_rows(kind).with_rows(trivial_rows(kind).rows)


def delta_definition(kind: Kind) -> tuple:
    """``Delta = n/2 - (1/2) sum c``: each mismatch probability is (1 - c)/2."""
    lay = layout(kind)
    rhs = Fraction(len(lay.properties), 2)
    expr = LinearExpr.var(DELTA) + LinearExpr.total(lay.connections) * Fraction(1, 2)
    return expr, "=", rhs


# -- the published bounds ----------------------------------------------------

def published_delta_system(kind: Kind) -> ConstraintSystem:
    """Hand-coded bounds on Delta over observables, absolute values expanded.

    EPR:  -1 + S/2 <= Delta <= 5 - S/2,      0 <= Delta <= 4 - sum |m|
    LG:   -1/2 + S/2 <= Delta <= 7/2 - S0/2, 0 <= Delta <= 3 - sum |m|
    with S the odd and S0 the even signed maximum of the pair correlations,
    plus the table bounds on the observed pairs.
    """
    lay = layout(kind)
    variables = lay.delta_variables
    d = LinearExpr.var(DELTA)
    half = Fraction(1, 2)
    n = len(lay.properties)
    obs = tuple(lay.observed)
    if kind is Kind.EPR_BELL:
        lower_const, upper_const, upper_parity = -1, 5, "odd"
    else:
        lower_const, upper_const, upper_parity = -half, Fraction(7, 2), "even"
    specs = [
        # lower + S/2 <= Delta
        SignedMaxSpec(obs, "odd", d - lower_const, scale=half),
        # Delta <= upper - S'/2
        SignedMaxSpec(obs, upper_parity, upper_const - d, scale=half),
    ]
    # sum |m| <= n - Delta, one row per sign pattern
    for parity in ("even", "odd"):
        specs.append(SignedMaxSpec(tuple(lay.marginals), parity, n - d))
    out = ConstraintSystem.build(variables, [(d, ">=", 0)])
    for spec in specs:
        out = out.with_rows(expand_signed_max(spec, variables).rows)
    tables = []
    for context, (left, right) in lay.pairs.items():
        tables += _pair_bounds(lay.obs(context), left, right)
    return out.with_rows(ConstraintSystem.build(variables, tables).rows)


# -- vertex images and projection checks -------------------------------------

def joint_vertex_images(kind: Kind) -> list[ExpectationVector]:
    """Expectations at every deterministic assignment of the context copies.

    ``marginals`` is keyed by copy (``"A1@11"``) since copies of a property
    can disagree at a vertex; ``connection_correlations`` by property.
    """
    lay = layout(kind)
    copies = lay.copies()
    index = {cv: k for k, cv in enumerate(copies)}
    pairs = lay.copy_pairs()
    out = []
    for v in itertools.product((1, -1), repeat=len(copies)):
        corr = {c: v[index[ContextualVariableId(l, c)]] * v[index[ContextualVariableId(r, c)]]
                for c, (l, r) in lay.pairs.items()}
        conn = {p: v[index[a]] * v[index[b]] for p, (a, b) in pairs.items()}
        marg = {str(cv): v[k] for k, cv in enumerate(copies)}
        out.append(ExpectationVector(corr, marg, conn))
    return out


@dataclass
class ProjectionCheck:
    vertices_sound: bool
    membership_samples: int
    membership_failures: int
    unsound_rows: list = field(default_factory=list)
    failed_points: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return self.vertices_sound and self.membership_failures == 0

    def as_dict(self) -> dict:
        return {"vertices_sound": self.vertices_sound,
                "membership_samples": self.membership_samples,
                "membership_failures": self.membership_failures}


class _Lifted:
    """Linear images of coupling atoms for the variables of a claimed system.

    Each claimed variable is a linear functional of the vertex expectations,
    except a marginal, which has one copy per context; those copies are
    equated through extra constraints (the no-signaling slice).
    """

    def __init__(self, kind: Kind, variables: Sequence[str]):
        self.lay = lay = layout(kind)
        self.variables = tuple(variables)
        known = set(lay.expectation_variables) | {DELTA}
        unknown = [v for v in self.variables if v not in known]
        if unknown:
            raise UnsupportedKind(f"variables {unknown} are not expectations of {kind.value}")
        self.images = joint_vertex_images(kind)
        obs_ctx = {lay.obs(c): c for c in lay.pairs}
        conn_prop = {"c" + p: p for p in lay.properties}
        copies = lay.copy_pairs()
        # value of variable (or copy marginal) at each vertex
        self.columns: dict[str, list[int]] = {}
        for name in self.variables:
            if name in obs_ctx:
                self.columns[name] = [int(e.pair_correlations[obs_ctx[name]]) for e in self.images]
            elif name in conn_prop:
                self.columns[name] = [int(e.connection_correlations[conn_prop[name]]) for e in self.images]
            elif name == DELTA:
                self.columns[name] = [sum(1 - int(c) for c in e.connection_correlations.values()) // 2
                                      for e in self.images]
        self.copy_columns: dict[str, list[list[int]]] = {}
        for name in self.variables:
            if name in lay.properties:
                self.copy_columns[name] = [[int(e.marginals[str(cv)]) for e in self.images]
                                           for cv in copies[name]]

    def vertex_point(self, k: int) -> dict | None:
        """Claimed-variable values at vertex k, or None if its copies disagree."""
        point = {name: col[k] for name, col in self.columns.items()}
        for name, cols in self.copy_columns.items():
            vals = {c[k] for c in cols}
            if len(vals) > 1:
                return None
            point[name] = vals.pop()
        return point

    def slice_rows(self) -> list[list[int]]:
        """Per-vertex differences of paired copy marginals (must vanish)."""
        rows = []
        for cols in self.copy_columns.values():
            first = cols[0]
            for other in cols[1:]:
                rows.append([a - b for a, b in zip(first, other)])
        return rows

    def row_values(self, coeffs: dict) -> list:
        """Row's left-hand side at each vertex, using the first copy for marginals."""
        n = len(self.images)
        out = [0] * n
        for name, c in coeffs.items():
            col = self.columns[name] if name in self.columns else self.copy_columns[name][0]
            for k in range(n):
                out[k] += c * col[k]
        return out

    def max_on_slice(self, coeffs: dict) -> Fraction:
        """max of the row over convex combinations of vertices inside the slice."""
        values = self.row_values(coeffs)
        slice_rows = self.slice_rows()
        n = len(self.images)
        columns = []
        for k in range(n):
            col = [(0, 1)]
            for r, row in enumerate(slice_rows):
                if row[k]:
                    col.append((r + 1, row[k]))
            columns.append(col)
        rhs = [1] + [0] * len(slice_rows)
        res = solve_sparse(columns, rhs, [-v for v in values])
        if res.status is not LpStatus.OPTIMAL:
            raise AssertionError(f"slice LP is {res.status.value}")
        return -Fraction(int(res.value.numerator), int(res.value.denominator))

    def member(self, point: dict) -> bool:
        """Is ``point`` an expectation vector of some coupling in the slice?"""
        n = len(self.images)
        lines = []  # (per-vertex values, target)
        for name, col in self.columns.items():
            lines.append((col, point[name]))
        for name, cols in self.copy_columns.items():
            for col in cols:
                lines.append((col, point[name]))
        columns = []
        for k in range(n):
            col = [(0, 1)]
            for r, (vals, _) in enumerate(lines):
                if vals[k]:
                    col.append((r + 1, vals[k]))
            columns.append(col)
        rhs = [Fraction(1)] + [Fraction(t) for _, t in lines]
        res = solve_sparse(columns, rhs, [0] * n)
        return res.status is LpStatus.OPTIMAL


def _random_direction(rng: SplitMix64, width: int) -> list[int]:
    while True:
        d = [rng.randint(-5, 5) for _ in range(width)]
        if any(d):
            return d


def _maximize(system: ConstraintSystem, direction: Sequence[int]) -> dict:
    eqs, ineqs = system.lp_constraints()
    objective = -LinearExpr(dict(zip(system.variables, direction)))
    res = lp_solve(LpProblem(objective, tuple(eqs), tuple(ineqs)))
    if res.status is not LpStatus.OPTIMAL:
        raise AssertionError(f"claimed system is {res.status.value} in a sampling direction")
    return {v: res.witness[v] for v in system.variables}


def verify_projection(kind: Kind, claimed: ConstraintSystem, sample_count: int = 200,
                      seed: int = 0, directions: Sequence[Sequence[int]] | None = None,
                      pool_size: int = 48) -> ProjectionCheck:
    """Check ``claimed`` against the convex hull of coupling expectations.

    Soundness: a row without marginal terms is evaluated at every vertex
    image (all 2^k of them); a row with marginal terms is maximized over
    convex combinations of vertex images whose paired copy marginals agree.
    Completeness: ``sample_count`` points of ``claimed`` are tested for
    membership in that set. Points are optima of random integer directions
    mixed with random rational weights; with ``directions`` given, each
    sample is the bare optimum of the next listed direction instead.
    """
    lifted = _Lifted(kind, claimed.variables)
    unsound = []
    for row in claimed.rows:
        coeffs = {v: c for v, c in zip(claimed.variables, row.coeffs) if c}
        if row.rel == EQ:
            checks = [(coeffs, row.rhs), ({v: -c for v, c in coeffs.items()}, -row.rhs)]
        else:
            checks = [(coeffs, row.rhs)]
        for co, rhs in checks:
            if any(v in lifted.copy_columns for v in co):
                worst = lifted.max_on_slice(co)
            else:
                worst = max(lifted.row_values(co))
            if worst > rhs:
                unsound.append(claimed.format_row(row))
                break

    rng = SplitMix64(seed)
    width = len(claimed.variables)
    samples: list[dict] = []
    if directions is not None:
        for k in range(sample_count):
            samples.append(_maximize(claimed, directions[k % len(directions)]))
    else:
        pool = [_maximize(claimed, _random_direction(rng, width))
                for _ in range(min(pool_size, sample_count))]
        for _ in range(sample_count):
            picks = [pool[rng.randint(0, len(pool) - 1)] for _ in range(rng.randint(1, 3))]
            weights = [Fraction(rng.randint(1, 16)) for _ in picks]
            total = sum(weights)
            samples.append({v: sum(w * p[v] for w, p in zip(weights, picks)) / total
                            for v in claimed.variables})
    failed = [p for p in samples if not lifted.member(p)]
    return ProjectionCheck(not unsound, len(samples), len(failed), unsound,
                           [{v: format_rational(x) for v, x in p.items()} for p in failed[:5]])


# -- the derivation ----------------------------------------------------------

@dataclass
class DerivationReport:
    kind: Kind
    nontrivial_count: int
    trivial_count: int
    derived_system: ConstraintSystem
    paper_system: ConstraintSystem
    equivalent: bool
    projection_check: ProjectionCheck | None = None
    connection_check: ProjectionCheck | None = None

    @property
    def ok(self) -> bool:
        checks = [c for c in (self.projection_check, self.connection_check) if c is not None]
        return self.equivalent and all(c.clean for c in checks)

    def as_dict(self) -> dict:
        def check(c):
            return None if c is None else c.as_dict()
        return {
            "kind": self.kind.value,
            "nontrivial_count": self.nontrivial_count,
            "trivial_count": self.trivial_count,
            "equivalent": self.equivalent,
            "projection_check": check(self.projection_check),
            "connection_check": check(self.connection_check),
            "derived_system": self.derived_system.format(),
            "paper_system": self.paper_system.format(),
        }


def eliminate_connections(kind: Kind) -> ConstraintSystem:
    """Connection system plus the Delta equality, connections projected out in index order."""
    lay = layout(kind)
    base = build_connection_system(kind).lift([DELTA] + lay.expectation_variables)
    expr, rel, rhs = delta_definition(kind)
    full = base.with_rows(ConstraintSystem.build(base.variables, [(expr, rel, rhs)]).rows)
    return fm_eliminate(full, lay.connections).lift(lay.delta_variables).sorted()


def derive_delta_bounds(kind: Kind, samples: int = 0, seed: int = 0) -> DerivationReport:
    """Run the elimination and compare with the published bounds.

    With ``samples > 0`` the published Delta system and the connection
    system are also checked against the coupling polytope.
    """
    nontrivial = cycle_rows(kind)
    trivial = trivial_rows(kind)
    derived = eliminate_connections(kind)
    published = published_delta_system(kind)
    equivalent = systems_equivalent(derived, published)
    projection = connection = None
    if samples:
        projection = verify_projection(kind, published, samples, seed)
        connection = verify_projection(kind, build_connection_system(kind), samples, seed)
    return DerivationReport(kind, len(nontrivial), len(trivial), derived,
                            published.sorted(), equivalent, projection, connection)


def delta_lower_bound(system: ConstraintSystem, values: dict) -> Fraction | None:
    """Smallest Delta allowed by ``system`` once every other variable is fixed."""
    fixed = [(LinearExpr.var(v), x) for v, x in values.items()]
    eqs, ineqs = system.lp_constraints()
    res = lp_solve(LpProblem(LinearExpr.var(DELTA), tuple(eqs) + tuple(fixed), tuple(ineqs)))
    return res.value if res.status is LpStatus.OPTIMAL else None

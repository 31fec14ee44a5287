"""Pairwise-measured binary systems.

Every property is a +/-1 valued random variable and every context measures
exactly two properties. A context-indexed copy of a property is identified by
``ContextualVariableId(property, context)``; in the Leggett-Garg system the
copy ``Q_{1,2}`` is ``ContextualVariableId("Q1", "12")``, in EPR-Bell
``A_{1,2}`` is ``ContextualVariableId("A1", "12")`` and ``B_{1,2}`` is
``ContextualVariableId("B2", "12")``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .rational import RationalLike, as_rational

OUTCOMES = ("++", "+-", "-+", "--")
_SIGN = {"+": 1, "-": -1}


class ScenarioError(ValueError):
    """Invalid scenario data."""


class SignalingError(ScenarioError):
    """A property's marginal differs between contexts."""

    def __init__(self, report: "NoSignalingReport"):
        self.report = report
        first = report.violations[0]
        super().__init__(
            f"signaling on property {first.property}: marginal differs between "
            f"contexts {first.context1!r} and {first.context2!r} by {first.difference}")


class UnsupportedKind(ScenarioError):
    pass


class Kind(enum.Enum):
    LEGGETT_GARG = "leggett-garg"
    EPR_BELL = "epr-bell"
    GENERIC = "generic"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        aliases = {"lg": cls.LEGGETT_GARG, "epr": cls.EPR_BELL}
        if text in aliases:
            return aliases[text]
        try:
            return cls(text)
        except ValueError:
            raise ScenarioError(f"unknown scenario kind {text!r}") from None


@dataclass(frozen=True, order=True)
class ContextualVariableId:
    property: str
    context: str

    def __str__(self):
        return f"{self.property}@{self.context}"


@dataclass(frozen=True)
class ObservedTable:
    """Joint distribution of one context; probs ordered ``++, +-, -+, --``."""

    context: str
    left: ContextualVariableId
    right: ContextualVariableId
    probs: tuple

    def __post_init__(self):
        probs = tuple(as_rational(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) != 4:
            raise ScenarioError(f"context {self.context!r}: need four probabilities")
        for label, p in zip(OUTCOMES, probs):
            if p < 0:
                raise ScenarioError(f"context {self.context!r}: p({label}) = {p} is negative")
        if sum(probs) != 1:
            raise ScenarioError(f"context {self.context!r}: probabilities sum to {sum(probs)}, not 1")
        if self.left.property == self.right.property:
            raise ScenarioError(f"context {self.context!r} pairs {self.left.property} with itself")
        if self.left.context != self.context or self.right.context != self.context:
            raise ScenarioError(f"context {self.context!r}: variable ids carry another context")

    @classmethod
    def of(cls, context: str, left: str, right: str, probs: Sequence[RationalLike]):
        return cls(context, ContextualVariableId(left, context),
                   ContextualVariableId(right, context), tuple(probs))

    def prob(self, x: int, y: int) -> Fraction:
        """P[left = x, right = y] for x, y in {+1, -1}."""
        return self.probs[(0 if x > 0 else 2) + (0 if y > 0 else 1)]

    @property
    def properties(self) -> tuple[str, str]:
        return self.left.property, self.right.property

    def marginal(self, prop: str) -> Fraction:
        """P[prop = +1] in this context."""
        pp, pm, mp, _ = self.probs
        if prop == self.left.property:
            return pp + pm
        if prop == self.right.property:
            return pp + mp
        raise KeyError(prop)

    def correlation(self) -> Fraction:
        pp, pm, mp, mm = self.probs
        return pp - pm - mp + mm


@dataclass(frozen=True)
class Scenario:
    kind: Kind
    properties: tuple
    tables: tuple

    def __post_init__(self):
        object.__setattr__(self, "properties", tuple(self.properties))
        object.__setattr__(self, "tables", tuple(self.tables))
        _validate_shape(self)

    def table(self, context: str) -> ObservedTable:
        for t in self.tables:
            if t.context == context:
                return t
        raise KeyError(context)

    def contexts_of(self, prop: str) -> list[ObservedTable]:
        return [t for t in self.tables if prop in t.properties]

    def contextual_variables(self) -> list[ContextualVariableId]:
        out = []
        for t in self.tables:
            out.extend((t.left, t.right))
        return out

    def correlations(self) -> list[Fraction]:
        return [t.correlation() for t in self.tables]


def _validate_shape(s: Scenario) -> None:
    if len(set(s.properties)) != len(s.properties):
        raise ScenarioError("duplicate property names")
    contexts = [t.context for t in s.tables]
    if len(set(contexts)) != len(contexts):
        raise ScenarioError("duplicate context names")
    known = set(s.properties)
    for t in s.tables:
        for prop in t.properties:
            if prop not in known:
                raise ScenarioError(f"context {t.context!r} uses undeclared property {prop!r}")
    pairs = [frozenset(t.properties) for t in s.tables]
    if s.kind is Kind.LEGGETT_GARG:
        if len(s.properties) != 3 or len(s.tables) != 3:
            raise ScenarioError("leggett-garg needs exactly 3 properties and 3 tables")
        wanted = {frozenset(p) for p in itertools.combinations(s.properties, 2)}
        if set(pairs) != wanted:
            raise ScenarioError("leggett-garg needs one table per unordered pair of properties")
    elif s.kind is Kind.EPR_BELL:
        if sorted(s.properties) != ["A1", "A2", "B1", "B2"] or len(s.tables) != 4:
            raise ScenarioError("epr-bell needs properties A1, A2, B1, B2 and 4 tables")
        wanted = {frozenset((a, b)) for a in ("A1", "A2") for b in ("B1", "B2")}
        if set(pairs) != wanted:
            raise ScenarioError("epr-bell needs one table per (A_i, B_j) pair")


# -- no-signaling ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    property: str
    context1: str
    context2: str
    difference: Fraction  # P[+1] in context1 minus P[+1] in context2


@dataclass(frozen=True)
class NoSignalingReport:
    ok: bool
    violations: tuple = ()


def check_no_signaling(s: Scenario) -> NoSignalingReport:
    violations = []
    for prop in s.properties:
        tables = s.contexts_of(prop)
        for t1, t2 in itertools.combinations(tables, 2):
            diff = t1.marginal(prop) - t2.marginal(prop)
            if diff:
                violations.append(Violation(prop, t1.context, t2.context, diff))
    return NoSignalingReport(not violations, tuple(violations))


def require_no_signaling(s: Scenario) -> None:
    report = check_no_signaling(s)
    if not report.ok:
        raise SignalingError(report)


# -- expectation parameterization ------------------------------------------

@dataclass(frozen=True)
class ExpectationVector:
    """Pair correlations per context, marginal expectations per property.

    ``connection_correlations`` is only filled by the derivation code.
    """

    pair_correlations: Mapping[str, Fraction]
    marginals: Mapping[str, Fraction]
    connection_correlations: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        for attr in ("pair_correlations", "marginals", "connection_correlations"):
            values = {k: as_rational(v) for k, v in getattr(self, attr).items()}
            for k, v in values.items():
                if not -1 <= v <= 1:
                    raise ScenarioError(f"expectation {k} = {v} outside [-1, 1]")
            object.__setattr__(self, attr, values)


def trivial_bound_violation(corr: Fraction, m1: Fraction, m2: Fraction) -> str | None:
    """Check ``-1 + |m1+m2| <= corr <= 1 - |m1-m2|``; describe the failing side."""
    lower = -1 + abs(m1 + m2)
    upper = 1 - abs(m1 - m2)
    if corr < lower:
        return f"{corr} < -1 + |{m1} + {m2}| = {lower}"
    if corr > upper:
        return f"{corr} > 1 - |{m1} - {m2}| = {upper}"
    return None


def _correlation_from_abcorr(t: ObservedTable) -> Fraction:
    # (4p - 1) - (2a - 1) - (2b - 1) with p = P[++], a, b the P[+] marginals
    a = t.marginal(t.left.property)
    b = t.marginal(t.right.property)
    return (4 * t.probs[0] - 1) - (2 * a - 1) - (2 * b - 1)


def to_expectations(s: Scenario) -> ExpectationVector:
    require_no_signaling(s)
    corr = {}
    for t in s.tables:
        direct = t.correlation()
        via_marginals = _correlation_from_abcorr(t)
        assert direct == via_marginals, (t.context, direct, via_marginals)
        corr[t.context] = direct
    marginals = {}
    for prop in s.properties:
        tables = s.contexts_of(prop)
        marginals[prop] = 2 * tables[0].marginal(prop) - 1 if tables else Fraction(0)
    return ExpectationVector(corr, marginals)


LG_PAIRS = {"12": ("Q1", "Q2"), "13": ("Q1", "Q3"), "23": ("Q2", "Q3")}
EPR_PAIRS = {f"{i}{j}": (f"A{i}", f"B{j}") for i in (1, 2) for j in (1, 2)}
LG_PROPERTIES = ("Q1", "Q2", "Q3")
EPR_PROPERTIES = ("A1", "A2", "B1", "B2")


def standard_pairs(kind: Kind) -> dict[str, tuple[str, str]]:
    if kind is Kind.LEGGETT_GARG:
        return dict(LG_PAIRS)
    if kind is Kind.EPR_BELL:
        return dict(EPR_PAIRS)
    raise UnsupportedKind(f"{kind.value} has no standard context layout")


def table_from_expectations(corr: Fraction, m1: Fraction, m2: Fraction) -> tuple:
    return ((1 + m1 + m2 + corr) / 4, (1 + m1 - m2 - corr) / 4,
            (1 - m1 + m2 - corr) / 4, (1 - m1 - m2 + corr) / 4)


def from_expectations(kind: Kind, e: ExpectationVector,
                      pairs: Mapping[str, tuple[str, str]] | None = None) -> Scenario:
    """Rebuild the observed tables from correlations and marginals.

    ``pairs`` maps context name to (left, right) property and is required for
    generic scenarios; the standard layouts are used otherwise.
    """
    if pairs is None:
        pairs = standard_pairs(kind)
    if set(pairs) != set(e.pair_correlations):
        raise ScenarioError("pair correlations do not match the context layout")
    props: dict[str, None] = {}
    for left, right in pairs.values():
        props.setdefault(left)
        props.setdefault(right)
    if kind is Kind.LEGGETT_GARG:
        props = dict.fromkeys(LG_PROPERTIES)
    elif kind is Kind.EPR_BELL:
        props = dict.fromkeys(EPR_PROPERTIES)
    missing = [p for p in props if p not in e.marginals]
    if missing:
        raise ScenarioError(f"missing marginals for {missing}")
    tables = []
    for context, (left, right) in pairs.items():
        c = e.pair_correlations[context]
        m1, m2 = e.marginals[left], e.marginals[right]
        problem = trivial_bound_violation(c, m1, m2)
        if problem:
            raise ScenarioError(f"context {context!r} ({left}, {right}) violates the table bounds: {problem}")
        tables.append(ObservedTable.of(context, left, right, table_from_expectations(c, m1, m2)))
    return Scenario(kind, tuple(props), tuple(tables))


def lg_scenario(correlations: Sequence[RationalLike],
                marginals: Sequence[RationalLike] = (0, 0, 0)) -> Scenario:
    """Leggett-Garg scenario from (<Q1Q2>, <Q1Q3>, <Q2Q3>) and (<Q1>, <Q2>, <Q3>)."""
    corr = dict(zip(LG_PAIRS, correlations))
    return from_expectations(Kind.LEGGETT_GARG,
                             ExpectationVector(corr, dict(zip(LG_PROPERTIES, marginals))))


def epr_scenario(correlations: Sequence[RationalLike],
                 marginals: Sequence[RationalLike] = (0, 0, 0, 0)) -> Scenario:
    """EPR-Bell scenario from (<A1B1>, <A1B2>, <A2B1>, <A2B2>) and (<A1>, <A2>, <B1>, <B2>)."""
    corr = dict(zip(EPR_PAIRS, correlations))
    return from_expectations(Kind.EPR_BELL,
                             ExpectationVector(corr, dict(zip(EPR_PROPERTIES, marginals))))

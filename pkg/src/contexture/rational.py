"""Exact rational scalars and linear expressions over named variables.

``Rational`` is :class:`fractions.Fraction`: always reduced, positive
denominator, exact arithmetic. Nothing in this package goes through a binary
float.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

_FRACTION_RE = re.compile(r"^-?[0-9]+(/[1-9][0-9]*)?$")
_DECIMAL_RE = re.compile(r"^-?[0-9]+\.[0-9]+$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, ``"n"`` or an exact decimal such as ``"0.425"``.

    Decimals are read digit by digit as ``num / 10**k``; there is no float
    round-trip.
    """
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string, got {type(text).__name__}")
    s = text.strip()
    if _FRACTION_RE.match(s):
        if "/" in s:
            num, den = s.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(s))
    if _DECIMAL_RE.match(s):
        sign = -1 if s.startswith("-") else 1
        whole, frac = s.lstrip("-").split(".")
        return sign * Fraction(int(whole + frac), 10 ** len(frac))
    raise ValueError(f"not an exact rational: {text!r}")


def as_rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    # gmpy2.mpq and friends expose numerator/denominator
    num = getattr(value, "numerator", None)
    den = getattr(value, "denominator", None)
    if num is not None and den is not None and not isinstance(value, float):
        return Fraction(int(num), int(den))
    raise TypeError(f"refusing to convert {type(value).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    """Canonical ``"p/q"`` string (``"n"`` for integers)."""
    return str(q)


def format_decimal(q: Fraction, places: int = 6) -> str:
    """Round-half-even decimal approximation, for human-readable output only."""
    scaled = round(q * 10 ** places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


class LinearExpr:
    """An affine form ``sum(coef[v] * v) + constant`` with exact coefficients.

    Zero coefficients are never stored. Instances are immutable.
    """

    __slots__ = ("_coefficients", "_constant", "_hash")

    def __init__(self, coefficients: Mapping[str, RationalLike] | None = None,
                 constant: RationalLike = 0):
        coeffs = {}
        for name, c in (coefficients or {}).items():
            c = as_rational(c)
            if c:
                coeffs[name] = c
        object.__setattr__(self, "_coefficients", coeffs)
        object.__setattr__(self, "_constant", as_rational(constant))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("LinearExpr is immutable")

    @classmethod
    def var(cls, name: str, coefficient: RationalLike = 1) -> "LinearExpr":
        return cls({name: coefficient})

    @classmethod
    def const(cls, value: RationalLike) -> "LinearExpr":
        return cls({}, value)

    @classmethod
    def total(cls, names: Iterable[str]) -> "LinearExpr":
        coeffs: dict[str, Fraction] = {}
        for name in names:
            coeffs[name] = coeffs.get(name, Fraction(0)) + 1
        return cls(coeffs)

    @property
    def coefficients(self) -> Mapping[str, Fraction]:
        return dict(self._coefficients)

    @property
    def constant(self) -> Fraction:
        return self._constant

    def coefficient(self, name: str) -> Fraction:
        return self._coefficients.get(name, Fraction(0))

    def variables(self) -> list[str]:
        return list(self._coefficients)

    def items(self):
        return self._coefficients.items()

    def evaluate(self, point: Mapping[str, RationalLike]) -> Fraction:
        total = self._constant
        for name, c in self._coefficients.items():
            total += c * as_rational(point[name])
        return total

    def _combine(self, other: "LinearExpr | RationalLike", sign: int) -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.const(other)
        coeffs = dict(self._coefficients)
        for name, c in other._coefficients.items():
            coeffs[name] = coeffs.get(name, Fraction(0)) + sign * c
        return LinearExpr(coeffs, self._constant + sign * other._constant)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self)._combine(other, 1)

    def __neg__(self):
        return self * -1

    def __mul__(self, k: RationalLike) -> "LinearExpr":
        if isinstance(k, LinearExpr):
            raise TypeError("product of two linear expressions is not linear")
        k = as_rational(k)
        return LinearExpr({n: c * k for n, c in self._coefficients.items()},
                          self._constant * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LinearExpr):
            return NotImplemented
        return (self._coefficients == other._coefficients
                and self._constant == other._constant)

    def __hash__(self):
        if self._hash is None:
            h = hash((frozenset(self._coefficients.items()), self._constant))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __repr__(self):
        return f"LinearExpr({format_expr(self)!r})"


def format_expr(expr: LinearExpr) -> str:
    parts = []
    for name, c in expr.items():
        if c == 1:
            term = name
        elif c == -1:
            term = f"-{name}"
        else:
            term = f"{c}*{name}"
        parts.append(term)
    if expr.constant or not parts:
        parts.append(str(expr.constant))
    text = " + ".join(parts)
    return text.replace("+ -", "- ")

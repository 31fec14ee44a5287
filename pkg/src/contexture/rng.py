"""Seeded generator and random no-signaling scenarios.

The generator is splitmix64 (Steele, Lea, Flood): the state advances by the
golden-ratio increment and the output is a fixed 64-bit mix of the state, so
any implementation reproduces the same stream from the same seed. Bounded
integers use rejection sampling, which avoids modulo bias.
"""

from __future__ import annotations

from fractions import Fraction

from .scenario import (EPR_PAIRS, EPR_PROPERTIES, LG_PAIRS, LG_PROPERTIES, Kind,
                       ObservedTable, Scenario, UnsupportedKind)

_MASK = (1 << 64) - 1


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if not 0 < n <= 1 << 64:
            raise ValueError("range must be in 1..2^64")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.below(hi - lo + 1)


def _grid_between(rng: SplitMix64, lo: Fraction, hi: Fraction, den: int) -> Fraction:
    """Uniform over {k/den} within [lo, hi]; lo and hi are themselves on the grid."""
    a, b = int(lo * den), int(hi * den)
    return Fraction(rng.randint(a, b), den)


def random_scenario(rng: SplitMix64, kind: Kind, denominator_bound: int) -> Scenario:
    """No-signaling by construction.

    Each property gets P[+] uniform on {0, 1/D, ..., 1}; each table then gets
    P[++] uniform on the grid points of [max(0, a + b - 1), min(a, b)], the
    range that keeps all four cells nonnegative.
    """
    if denominator_bound < 2:
        raise ValueError("denominator bound must be at least 2")
    if kind is Kind.EPR_BELL:
        props, pairs = EPR_PROPERTIES, EPR_PAIRS
    elif kind is Kind.LEGGETT_GARG:
        props, pairs = LG_PROPERTIES, LG_PAIRS
    else:
        raise UnsupportedKind(f"cannot sample {kind.value} scenarios")
    den = denominator_bound
    plus = {p: Fraction(rng.randint(0, den), den) for p in props}
    tables = []
    for context, (left, right) in pairs.items():
        a, b = plus[left], plus[right]
        p = _grid_between(rng, max(Fraction(0), a + b - 1), min(a, b), den)
        tables.append(ObservedTable.of(context, left, right, (p, a - p, b - p, 1 - a - b + p)))
    return Scenario(kind, props, tuple(tables))


def random_scenarios(kind: Kind, count: int, seed: int, denominator_bound: int = 64):
    rng = SplitMix64(seed)
    for _ in range(count):
        yield random_scenario(rng, kind, denominator_bound)

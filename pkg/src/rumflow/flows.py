"""Flows on the Boolean lattice and distributions over rankings.

Nodes of the lattice are subsets of the alternatives; the arc adding
alternative ``x`` to ``D \\ {x}`` is keyed by its head and the added element,
``(D, x)``.  This mirrors the pair ``(D, x)`` of a choice dataset, which is
how arc values and choice polynomials line up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Mapping

from .model import CompleteDataset, bits, format_fraction, set_key


def all_arcs(n: int) -> list:
    """Every arc ``(D, x)`` of the lattice on ``n`` alternatives, canonical order."""
    out = []
    for d in sorted(range(1, 1 << n), key=set_key):
        for x in bits(d):
            out.append((d, x))
    return out


@dataclass(frozen=True)
class LatticeFlow:
    """Arc values on the lattice; arcs absent from ``values`` carry zero.

    Values may be negative: signed flows are used to build counterexamples.
    """

    n: int
    values: Mapping = field(default_factory=dict)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def __getitem__(self, arc) -> Fraction:
        return self.values.get(arc, Fraction(0))

    def inflow(self, node: int) -> Fraction:
        return sum((self[(node, x)] for x in bits(node)), Fraction(0))

    def outflow(self, node: int) -> Fraction:
        return sum((self[(node | 1 << x, x)] for x in range(self.n) if not node >> x & 1), Fraction(0))

    def net_out(self, node: int) -> Fraction:
        return self.outflow(node) - self.inflow(node)

    def scaled(self, c) -> "LatticeFlow":
        return LatticeFlow(self.n, {a: c * v for a, v in self.values.items() if c * v != 0})

    def __add__(self, other: "LatticeFlow") -> "LatticeFlow":
        vals = dict(self.values)
        for a, v in other.values.items():
            vals[a] = vals.get(a, Fraction(0)) + v
        return LatticeFlow(self.n, {a: v for a, v in vals.items() if v != 0})

    def __sub__(self, other: "LatticeFlow") -> "LatticeFlow":
        return self + other.scaled(-1)

    def is_unit(self) -> bool:
        """Unit flow from the empty set to the full set, conserved inside."""
        if self.net_out(0) != 1 or self.inflow(self.full) != 1:
            return False
        return all(self.net_out(d) == 0 for d in range(1, self.full))


def combine(n: int, terms) -> LatticeFlow:
    """Linear combination of flows given as ``(coefficient, flow)`` pairs."""
    total = LatticeFlow(n, {})
    for c, f in terms:
        total = total + f.scaled(Fraction(c))
    return total


def path_flow(n: int, arcs, weight=1) -> LatticeFlow:
    w = Fraction(weight)
    vals = {}
    for a in arcs:
        vals[a] = vals.get(a, Fraction(0)) + w
    return LatticeFlow(n, vals)


def ranking_path(ranking) -> list:
    """Arcs of the path for a best-first ranking: worst element is added first."""
    arcs = []
    node = 0
    for x in reversed(ranking):
        node |= 1 << x
        arcs.append((node, x))
    return arcs


def path_ranking(arcs) -> tuple:
    """Best-first ranking read off a source-to-sink path."""
    return tuple(x for _, x in reversed(arcs))


def all_rankings(n: int) -> list:
    """Every strict order of ``range(n)`` as a best-first tuple, lexicographic."""
    return list(permutations(range(n)))


def top(ranking, menu: int) -> int:
    """Best element of ``menu`` under ``ranking``."""
    for x in ranking:
        if menu >> x & 1:
            return x
    raise ValueError("empty menu")


@dataclass(frozen=True)
class RankingDistribution:
    """Probability weights on strict rankings (best-first tuples of indices)."""

    alternatives: tuple
    weights: Mapping

    @property
    def n(self) -> int:
        return len(self.alternatives)

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def choice_probability(self, menu: int, x: int) -> Fraction:
        return sum((w for r, w in self.weights.items() if top(r, menu) == x), Fraction(0))

    def induced(self) -> CompleteDataset:
        """Complete dataset generated by choosing the best available element."""
        n = self.n
        freq = {}
        for d in sorted(range(1, 1 << n), key=set_key):
            for x in bits(d):
                freq[(d, x)] = Fraction(0)
        for r, w in self.weights.items():
            if w == 0:
                continue
            for d in range(1, 1 << n):
                freq[(d, top(r, d))] += w
        return CompleteDataset(self.alternatives, freq)

    def flow(self) -> LatticeFlow:
        vals = {}
        for r, w in self.weights.items():
            for a in ranking_path(r):
                vals[a] = vals.get(a, Fraction(0)) + w
        return LatticeFlow(self.n, {a: v for a, v in vals.items() if v != 0})

    def mix(self, other: "RankingDistribution", lam) -> "RankingDistribution":
        lam = Fraction(lam)
        out = {}
        for r, w in self.weights.items():
            out[r] = out.get(r, Fraction(0)) + lam * w
        for r, w in other.weights.items():
            out[r] = out.get(r, Fraction(0)) + (1 - lam) * w
        return RankingDistribution(self.alternatives, {r: w for r, w in sorted(out.items()) if w != 0})

    def fmt_ranking(self, ranking) -> str:
        return ">".join(str(self.alternatives[i]) for i in ranking)

    def to_dict(self) -> dict:
        return {self.fmt_ranking(r): format_fraction(w) for r, w in sorted(self.weights.items())}

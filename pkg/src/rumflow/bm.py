"""Block-Marschak polynomials and the inverse map from lattice flows.

``K(p, D, x)`` is the alternating sum of ``p(E, x)`` over supersets ``E`` of
``D``.  Under a ranking distribution it is the mass of rankings that put every
element outside ``D`` above ``x`` and ``x`` above the rest of ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import ConservationViolated, NegativeProbability, UncomputablePair
from .flows import LatticeFlow, all_arcs
from .model import CompleteDataset, IncompleteDataset, bits, popcount, set_key, supersets


@dataclass(frozen=True)
class BMTable:
    """Polynomial values on every observable pair, in canonical pair order."""

    values: Mapping

    def __getitem__(self, pair) -> Fraction:
        return self.values[pair]

    def __contains__(self, pair) -> bool:
        return pair in self.values

    def __len__(self) -> int:
        return len(self.values)

    def negatives(self) -> list:
        return [(p, v) for p, v in self.values.items() if v < 0]


def bm_polynomial(data, menu: int, x: int) -> Fraction:
    """Alternating superset sum for a single pair.

    ``data`` is an ``IncompleteDataset`` (the pair must be observable, which
    puts every superset menu in the family) or a ``CompleteDataset``.
    """
    if not menu >> x & 1:
        raise UncomputablePair(f"alternative {x} is not in menu {bits(menu)}")
    if isinstance(data, IncompleteDataset):
        inst = data.instance
        if not inst.is_observable(menu, x):
            raise UncomputablePair(f"pair {inst.fmt_pair((menu, x))} is not observable")
        full = inst.full
        freq = data.freq
    else:
        full = data.full
        freq = data.freq
    total = Fraction(0)
    base = popcount(menu)
    for e in supersets(menu, full):
        term = freq[(e, x)]
        total += -term if (popcount(e) - base) & 1 else term
    return total


def _superset_mobius(values: dict, n: int) -> dict:
    """In place transform ``f(D) <- sum_{E >= D} (-1)^{|E \\ D|} f(E)``."""
    for b in range(n):
        bit = 1 << b
        for d in range(1 << n):
            if not d & bit:
                values[d] = values[d] - values[d | bit]
    return values


def _superset_zeta(values: dict, n: int) -> dict:
    """In place transform ``f(D) <- sum_{E >= D} f(E)``."""
    for b in range(n):
        bit = 1 << b
        for d in range(1 << n):
            if not d & bit:
                values[d] = values[d] + values[d | bit]
    return values


def bm_table(ds: IncompleteDataset) -> BMTable:
    """Polynomials on all observable pairs, one Mobius pass per alternative."""
    inst = ds.instance
    n = inst.n
    zero = Fraction(0)
    per_alt = {}
    for x in bits(inst.observable):
        # entries outside the family are never read for family members, since
        # the family is closed under supersets
        f = {d: ds.freq.get((d, x), zero) for d in range(1 << n)}
        per_alt[x] = _superset_mobius(f, n)
    return BMTable({(d, x): per_alt[x][d] for d, x in inst.observable_pairs})


def complete_bm(cds: CompleteDataset) -> dict:
    """Polynomials on every pair of a complete dataset."""
    n = cds.n
    zero = Fraction(0)
    per_alt = {}
    for x in range(n):
        f = {d: cds.freq.get((d, x), zero) for d in range(1 << n)}
        per_alt[x] = _superset_mobius(f, n)
    return {(d, x): per_alt[x][d] for d, x in all_arcs(n)}


def bm_flow(cds: CompleteDataset) -> LatticeFlow:
    """The lattice flow carrying ``K(p, D, x)`` on arc ``(D \\ x, D)``."""
    return LatticeFlow(cds.n, {a: v for a, v in complete_bm(cds).items() if v != 0})


def flow_to_complete(r: LatticeFlow, alternatives=None) -> CompleteDataset:
    """Complete dataset whose polynomials equal the arc values of ``r``.

    ``r`` must carry one unit into the full set, be conserved at interior
    nodes, and have nonnegative superset sums ``sum_{E >= D} r(E \\ x, E)``;
    individual arcs may be negative.
    """
    n = r.n
    full = r.full
    if r.inflow(full) != 1:
        raise ConservationViolated(f"flow into the full set is {r.inflow(full)}, expected 1")
    for d in range(1, full):
        if r.net_out(d) != 0:
            raise ConservationViolated(f"flow not conserved at node {bits(d)}")
    zero = Fraction(0)
    freq = {}
    for x in range(n):
        f = {d: (r[(d, x)] if d >> x & 1 else zero) for d in range(1 << n)}
        _superset_zeta(f, n)
        for d in range(1 << n):
            if d >> x & 1:
                if f[d] < 0:
                    raise NegativeProbability(f"superset sum at menu {bits(d)}, alternative {x} is {f[d]}")
                freq[(d, x)] = f[d]
    out = {}
    for d in sorted(range(1, 1 << n), key=set_key):
        row = zero
        for x in bits(d):
            out[(d, x)] = freq[(d, x)]
            row += freq[(d, x)]
        # conservation plus unit inflow forces unit row sums
        assert row == 1, (d, row)
    alts = tuple(alternatives) if alternatives is not None else tuple(range(n))
    return CompleteDataset(alts, out)

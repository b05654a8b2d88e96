"""The capacitated lattice network and flow feasibility.

Nodes are the subsets of ``X``; the arc ``(D, x)`` runs from ``D \\ x`` to
``D``.  An arc is observable when its head pair is observable, and then its
flow is pinned to the polynomial value ``K(rho, D, x)``.  Unobservable arcs
are free (lower bound 0, no upper bound).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .bm import BMTable, bm_table
from .errors import InconsistentBounds, NegativeArc, NotUnitFlow
from .flows import LatticeFlow, RankingDistribution, all_arcs, path_ranking
from .model import IncompleteDataset, Instance

INF = None  # symbolic infinite capacity


@dataclass(frozen=True)
class CapacitatedLattice:
    """Lattice network with per-arc bounds; ``None`` upper bound means unbounded."""

    instance: Instance
    lower: Mapping
    upper: Mapping
    observable: Mapping

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def arcs(self) -> list:
        return list(self.lower)

    def negative_arcs(self) -> list:
        return [a for a, l in self.lower.items() if l < 0]


def build_network(ds: IncompleteDataset, bm: BMTable | None = None) -> CapacitatedLattice:
    inst = ds.instance
    bm = bm if bm is not None else bm_table(ds)
    lower, upper, obs = {}, {}, {}
    for arc in all_arcs(inst.n):
        if arc in bm:
            lower[arc] = upper[arc] = bm[arc]
            obs[arc] = True
        else:
            lower[arc] = Fraction(0)
            upper[arc] = INF
            obs[arc] = False
    return CapacitatedLattice(inst, lower, upper, obs)


def _delta(instance: Instance, collection: Iterable[int], value) -> Fraction:
    members = set(collection)
    n, full = instance.n, instance.full
    total = Fraction(0)
    for d in members:
        for x in range(n):
            if d >> x & 1:
                # inflow through (d \ x, d)
                if (d & ~(1 << x)) not in members and instance.is_observable(d, x):
                    total -= value((d, x))
            else:
                e = d | 1 << x
                if e not in members and instance.is_observable(e, x):
                    total += value((e, x))
    if full in members and 0 not in members:
        total += 1
    if 0 in members and full not in members:
        total -= 1
    return total


def delta_rho(ds: IncompleteDataset, collection: Iterable[int], bm: BMTable | None = None) -> Fraction:
    """Net observable outflow of a node collection, plus source/sink indicators."""
    bm = bm if bm is not None else bm_table(ds)
    return _delta(ds.instance, collection, bm.__getitem__)


def delta_flow(r: LatticeFlow, instance: Instance, collection: Iterable[int]) -> Fraction:
    """Same functional with arc values taken from a flow instead of polynomials."""
    return _delta(instance, collection, r.__getitem__)


def node_deltas(ds: IncompleteDataset, bm: BMTable | None = None) -> dict:
    """``delta`` of every singleton collection ``{D}``; the functional is additive."""
    bm = bm if bm is not None else bm_table(ds)
    return {d: _delta(ds.instance, (d,), bm.__getitem__) for d in range(ds.instance.full + 1)}


# ---------------------------------------------------------------------------
# max flow with lower bounds

class _Residual:
    """Residual graph for Edmonds-Karp with exact capacities (``None`` = infinite)."""

    def __init__(self, size: int):
        self.adj = [[] for _ in range(size)]
        self.to = []
        self.cap = []

    def add(self, u: int, v: int, cap) -> int:
        idx = len(self.to)
        self.to += [v, u]
        self.cap += [cap, Fraction(0)]
        self.adj[u].append(idx)
        self.adj[v].append(idx + 1)
        return idx

    def _positive(self, e) -> bool:
        c = self.cap[e]
        return c is None or c > 0

    def max_flow(self, s: int, t: int) -> Fraction:
        total = Fraction(0)
        while True:
            parent = [-1] * len(self.adj)
            parent[s] = -2
            queue = deque([s])
            while queue and parent[t] == -1:
                u = queue.popleft()
                for e in self.adj[u]:
                    v = self.to[e]
                    if parent[v] == -1 and self._positive(e):
                        parent[v] = e
                        queue.append(v)
            if parent[t] == -1:
                return total
            push = None
            v = t
            while v != s:
                e = parent[v]
                c = self.cap[e]
                if c is not None and (push is None or c < push):
                    push = c
                v = self.to[e ^ 1]
            assert push is not None, "augmenting path of unbounded capacity"
            v = t
            while v != s:
                e = parent[v]
                if self.cap[e] is not None:
                    self.cap[e] -= push
                if self.cap[e ^ 1] is not None:
                    self.cap[e ^ 1] += push
                v = self.to[e ^ 1]
            total += push


def feasible_flow(net: CapacitatedLattice) -> LatticeFlow | None:
    """A unit flow from the empty set to ``X`` within all arc bounds, if any.

    Flows are nonnegative, so an arc pinned to a negative value makes the
    problem infeasible and ``None`` is returned.
    """
    for arc, l in net.lower.items():
        u = net.upper[arc]
        if u is not None and l > u:
            raise InconsistentBounds(f"lower bound above upper bound on arc {arc}")
    if net.negative_arcs():
        return None
    n = net.n
    size = 1 << n
    full = size - 1
    # f = lower + g with 0 <= g <= upper - lower; the required net supply
    # of each node shifts by the lower bounds
    supply = [Fraction(0)] * size
    supply[0] += 1
    supply[full] -= 1
    graph = _Residual(size + 2)
    src, snk = size, size + 1
    index = {}
    for arc, l in net.lower.items():
        head, x = arc
        tail = head & ~(1 << x)
        u = net.upper[arc]
        supply[tail] -= l
        supply[head] += l
        index[arc] = graph.add(tail, head, None if u is None else u - l)
    need = Fraction(0)
    for v in range(size):
        if supply[v] > 0:
            graph.add(src, v, supply[v])
            need += supply[v]
        elif supply[v] < 0:
            graph.add(v, snk, -supply[v])
    if graph.max_flow(src, snk) != need:
        return None
    values = {}
    for arc, l in net.lower.items():
        # flow pushed on an arc equals the capacity gained by its reverse edge
        g = graph.cap[index[arc] ^ 1]
        v = l + g
        if v != 0:
            values[arc] = v
    return LatticeFlow(n, values)


def decompose_flow(r: LatticeFlow, alternatives=None) -> RankingDistribution:
    """Split a nonnegative unit flow into weighted source-to-sink paths.

    At each node the smallest alternative whose arc still carries flow is
    followed; each path is one ranking (the element added first is worst).
    """
    for arc, v in r.values.items():
        if v < 0:
            raise NegativeArc(f"negative flow {v} on arc {arc}")
    if not r.is_unit():
        raise NotUnitFlow("flow is not a conserved unit flow from the empty set to the full set")
    n, full = r.n, r.full
    rem = {a: v for a, v in r.values.items() if v > 0}
    weights = {}
    remaining = Fraction(1)
    while remaining > 0:
        node = 0
        path = []
        while node != full:
            for x in range(n):
                if not node >> x & 1 and rem.get((node | 1 << x, x), 0) > 0:
                    node |= 1 << x
                    path.append((node, x))
                    break
            else:
                raise NotUnitFlow("flow path stalls before reaching the full set")
        w = min(rem[a] for a in path)
        for a in path:
            rem[a] -= w
            if rem[a] == 0:
                del rem[a]
        rk = path_ranking(path)
        weights[rk] = weights.get(rk, Fraction(0)) + w
        remaining -= w
    alts = tuple(alternatives) if alternatives is not None else tuple(range(n))
    return RankingDistribution(alts, dict(sorted(weights.items())))


def to_dot(net: CapacitatedLattice) -> str:
    """Graphviz rendering: observable arcs solid, unobservable dashed."""
    inst = net.instance

    def name(m):
        return '"' + ("{}" if m == 0 else inst.fmt_set(m)) + '"'

    lines = ["digraph lattice {", "  rankdir=BT;"]
    for arc in net.arcs:
        head, x = arc
        tail = head & ~(1 << x)
        if net.observable[arc]:
            attrs = f'style=solid, label="{net.lower[arc]}"'
        else:
            attrs = "style=dashed"
        lines.append(f"  {name(tail)} -> {name(head)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Rationalizability of incomplete datasets.

A dataset is generated by a distribution over rankings exactly when

* every observable polynomial ``K(rho, D, x)`` with ``1 < |D| < |X|`` is
  nonnegative, and
* the net observable outflow ``delta`` of every essential test collection
  inside the menu family is nonnegative.

A test collection is ``{A | E : E in F}`` with ``A`` a set of observable
alternatives and ``F`` a nonempty upper set of subsets of the hidden ones; it
is essential when ``A`` is neither empty nor all observables and ``F`` is not
every subset.

Two boundary cases need more than that.  With a single observable
alternative ``a`` no essential collection exists, and ``K(rho, {a}, a)`` must
be checked as well.  When the set of all observables is not an offered menu,
collections with ``A`` equal to all observables can have negative ``delta``
and are checked too (see ``enumerate_boundary_test_collections``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import lcm

import numpy as np

from .bm import BMTable, bm_table
from .errors import GroundTooLarge, InstanceTooLarge
from .flows import RankingDistribution
from .model import IncompleteDataset, Instance, bits, format_fraction, mask_of, popcount, set_key, submasks
from .network import build_network, decompose_flow, delta_rho, feasible_flow, node_deltas

MAX_UPPER_GROUND = 6


# ---------------------------------------------------------------------------
# upper sets

@lru_cache(maxsize=None)
def upper_set_tables(k: int) -> np.ndarray:
    """Upper sets of ``2^{range(k)}`` as truth tables (bit ``s`` = subset ``s``).

    Splitting on the last element, an upper set is a pair ``U0 <= U1`` of
    upper sets on one element fewer: ``U0`` the members without it, ``U1``
    the members with it removed.
    """
    if k > MAX_UPPER_GROUND:
        raise GroundTooLarge(f"upper sets are enumerated for at most {MAX_UPPER_GROUND} elements")
    if k == 0:
        return np.array([0, 1], dtype=np.uint64)
    prev = upper_set_tables(k - 1)
    shift = np.uint64(1 << (k - 1))
    chunks = []
    for u1 in prev:
        lows = prev[(prev & ~u1) == 0]
        chunks.append(lows | (u1 << shift))
    out = np.concatenate(chunks)
    out.setflags(write=False)
    return out


def _table_members(table: int, k: int) -> list:
    return [s for s in range(1 << k) if table >> s & 1]


def _family_key(members) -> tuple:
    return (len(members), [set_key(m) for m in sorted(members, key=set_key)])


def enumerate_upper_sets(ground) -> list:
    """All upward closed families of subsets of ``ground``.

    ``ground`` is an iterable of alternative indices (or a bitmask).  Families
    are frozensets of bitmasks over those indices, canonically ordered by size
    and then by their members; the empty family and the full power set are
    included.
    """
    idx = bits(ground) if isinstance(ground, int) else sorted(ground)
    k = len(idx)
    if k > MAX_UPPER_GROUND:
        raise GroundTooLarge(f"upper sets are enumerated for at most {MAX_UPPER_GROUND} elements")
    lift = [mask_of(idx[i] for i in range(k) if s >> i & 1) for s in range(1 << k)]
    fams = [frozenset(lift[s] for s in _table_members(int(t), k)) for t in upper_set_tables(k)]
    return sorted(fams, key=_family_key)


def count_upper_sets(k: int) -> int:
    return len(upper_set_tables(k))


# ---------------------------------------------------------------------------
# test collections

@dataclass(frozen=True)
class TestCollection:
    """The collection ``{base | E : E in family}``.

    Attributes:
        base: observable part ``A`` (bitmask).
        family: upper set of subsets of the hidden alternatives (bitmasks).
        hidden: mask of the hidden alternatives.
        observable: mask of the observable alternatives.
    """

    __test__ = False  # keep pytest from collecting this class

    base: int
    family: frozenset
    hidden: int
    observable: int

    @property
    def members(self) -> frozenset:
        return frozenset(self.base | e for e in self.family)

    @property
    def essential(self) -> bool:
        full_family = len(self.family) == 1 << popcount(self.hidden)
        return 0 != self.base != self.observable and len(self.family) > 0 and not full_family

    @property
    def minimal(self) -> list:
        """Minimal elements of the family, canonical order."""
        fam = self.family
        return sorted((e for e in fam if not any(f != e and f & e == f for f in fam)), key=set_key)

    def describe(self, instance: Instance) -> str:
        mins = ",".join(instance.fmt_set(e) for e in self.minimal)
        return f"A={instance.fmt_set(self.base)};E={mins}"

    def sort_key(self) -> tuple:
        return (set_key(self.base), _family_key(self.family))


def make_test_collection(instance: Instance, base: int, minimal) -> TestCollection:
    """Collection with the given base and the upward closure of ``minimal`` in the hidden set."""
    hidden = instance.unobservable
    fam = set()
    for m in minimal:
        if m & ~hidden:
            raise ValueError("minimal elements must consist of hidden alternatives")
        for extra in submasks(hidden & ~m):
            fam.add(m | extra)
    return TestCollection(base, frozenset(fam), hidden, instance.observable)


def enumerate_essential_test_collections(instance: Instance) -> list:
    """Essential test collections contained in the menu family, canonical order."""
    hidden, obs = instance.unobservable, instance.observable
    k = popcount(hidden)
    if k > MAX_UPPER_GROUND:
        raise GroundTooLarge(f"at most {MAX_UPPER_GROUND} hidden alternatives are supported")
    families = [f for f in enumerate_upper_sets(hidden) if 0 < len(f) < 1 << k]
    out = []
    for a in sorted(submasks(obs), key=set_key):
        if a == 0 or a == obs:
            continue
        for fam in families:
            tc = TestCollection(a, fam, hidden, obs)
            members = tc.members
            assert 0 not in members and instance.full not in members
            if all(instance.has_menu(d) for d in members):
                out.append(tc)
    return out


def enumerate_boundary_test_collections(instance: Instance) -> list:
    """Collections with ``A`` = all observables, needed when that menu is not offered.

    If ``X \\ X*`` is offered, every such collection inside the menu family
    has ``delta >= 0`` once the polynomials are nonnegative.  Otherwise the
    full-family collection leaves the menu family and that argument is lost,
    so the ones inside the family are checked directly.
    """
    hidden, obs = instance.unobservable, instance.observable
    if obs == 0 or instance.has_menu(obs):
        return []
    k = popcount(hidden)
    if k > MAX_UPPER_GROUND:
        raise GroundTooLarge(f"at most {MAX_UPPER_GROUND} hidden alternatives are supported")
    out = []
    for fam in enumerate_upper_sets(hidden):
        if 0 < len(fam) < 1 << k:
            tc = TestCollection(obs, fam, hidden, obs)
            if all(instance.has_menu(d) for d in tc.members):
                out.append(tc)
    return out


def condition_i_applies(instance: Instance, menu: int) -> bool:
    """Menus whose polynomials enter condition (i).

    Singleton menus are implied by the other inequalities unless there is
    exactly one observable alternative.
    """
    size = popcount(menu)
    return 1 < size < instance.n or (size == 1 and popcount(instance.observable) == 1)


# ---------------------------------------------------------------------------
# the check

@dataclass
class RationalizabilityReport:
    """Outcome of the rationalizability check.

    Attributes:
        verdict: True when the dataset is generated by some ranking distribution.
        condition_i_violations: ``(D, x, K)`` with ``K < 0`` on menus where
            ``condition_i_applies``.
        condition_ii_violations: ``(collection, delta)`` with ``delta < 0``,
            over essential and boundary collections.
        certificate: a rationalizing distribution when the verdict is positive.
        singleton_values: polynomials on singleton menus outside condition (i) (diagnostic only).
    """

    instance: Instance
    verdict: bool
    condition_i_violations: list = field(default_factory=list)
    condition_ii_violations: list = field(default_factory=list)
    certificate: RankingDistribution | None = None
    singleton_values: dict = field(default_factory=dict)

    @property
    def violation_count(self) -> int:
        return len(self.condition_i_violations) + len(self.condition_ii_violations)

    def to_dict(self, certificate: bool = True) -> dict:
        inst = self.instance
        out = {
            "verdict": "rationalizable" if self.verdict else "not rationalizable",
            "condition_i_violations": [
                {"menu": inst.names(d), "alternative": inst.alternatives[x], "value": format_fraction(v)}
                for d, x, v in self.condition_i_violations
            ],
            "condition_ii_violations": [
                {
                    "base": inst.names(tc.base),
                    "minimal": [inst.names(e) for e in tc.minimal],
                    "members": [inst.names(m) for m in sorted(tc.members, key=set_key)],
                    "value": format_fraction(v),
                }
                for tc, v in self.condition_ii_violations
            ],
            "singleton_values": [
                {"menu": inst.names(d), "alternative": inst.alternatives[x], "value": format_fraction(v)}
                for (d, x), v in self.singleton_values.items()
            ],
        }
        if certificate and self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def check_theorem(ds: IncompleteDataset, certificate: bool = True, bm: BMTable | None = None) -> RationalizabilityReport:
    """Evaluate both families of inequalities and report every violation."""
    inst = ds.instance
    bm = bm if bm is not None else bm_table(ds)
    cond_i = []
    singles = {}
    for (d, x), v in bm.values.items():
        if condition_i_applies(inst, d):
            if v < 0:
                cond_i.append((d, x, v))
        elif popcount(d) == 1:
            singles[(d, x)] = v
    cond_ii = []
    for tc in enumerate_essential_test_collections(inst) + enumerate_boundary_test_collections(inst):
        v = delta_rho(ds, tc.members, bm)
        if v < 0:
            cond_ii.append((tc, v))
    verdict = not cond_i and not cond_ii
    cert = None
    if verdict and certificate:
        flow = feasible_flow(build_network(ds, bm))
        if flow is None:
            raise RuntimeError("inequalities hold but no feasible flow was found")
        cert = decompose_flow(flow, inst.alternatives)
    return RationalizabilityReport(inst, verdict, cond_i, cond_ii, cert, singles)


def check_complete_collections(ds: IncompleteDataset) -> bool:
    """Check ``delta >= 0`` over every complete collection avoiding the empty set.

    A complete collection is closed under adding hidden alternatives, so it
    splits into one upper set of hidden subsets per observable base.  Every
    such collection is enumerated; ``delta`` is summed from node values.
    The cut argument behind this check treats observable arcs as
    nonnegative flows, so a negative observable polynomial fails it outright.
    """
    inst = ds.instance
    if inst.n > 4:
        raise InstanceTooLarge("complete collections are enumerated only for at most 4 alternatives")
    hidden, obs = inst.unobservable, inst.observable
    hid = bits(hidden)
    k = len(hid)
    lift = [mask_of(hid[i] for i in range(k) if s >> i & 1) for s in range(1 << k)]
    bm = bm_table(ds)
    if bm.negatives():
        return False
    deltas = node_deltas(ds, bm)
    scale = 1
    for v in deltas.values():
        scale = lcm(scale, v.denominator)
    ints = {d: int(v * scale) for d, v in deltas.items()}
    tables = [int(t) for t in upper_set_tables(k)]
    members = {t: [lift[s] for s in _table_members(t, k)] for t in tables}
    sums = [0]
    for a in sorted(submasks(obs), key=set_key):
        vals = []
        for t in tables:
            nodes = [a | e for e in members[t]]
            if 0 in nodes:
                continue
            vals.append(sum(ints[d] for d in nodes))
        sums = [s + v for s in sums for v in vals]
    return min(sums) >= 0

"""McFadden-Richter polynomials.

For a multiset of observable pairs ``(D_i, x_i)`` the polynomial is

    R = max over rankings of #{i : x_i is best in D_i} - sum_i rho(D_i, x_i).

A dataset is generated by a ranking distribution exactly when R >= 0 for
every multiset.  ``check_mr`` tests the multisets whose multiplicities are
bounded by ``m``, skipping redundant ones (those holding every pair of some
menu, whose removal leaves R unchanged).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import InstanceTooLarge, PairNotObservable
from .flows import all_rankings, top
from .model import IncompleteDataset, Instance, bits, build_instance, pair_key, popcount, supersets
from .theorem import check_theorem

MAX_MR_ALTERNATIVES = 6
EXHAUSTIVE_LIMIT = 2_000_000
CHUNK = 1 << 16


@dataclass(frozen=True)
class MRSequence:
    """A multiset of pairs ``(D, x)``, stored as sorted ``(pair, multiplicity)`` items."""

    items: tuple

    def __post_init__(self):
        for _, k in self.items:
            if k < 1:
                raise ValueError("multiplicities must be positive")

    @classmethod
    def from_pairs(cls, pairs) -> "MRSequence":
        counts = {}
        for p in pairs:
            counts[tuple(p)] = counts.get(tuple(p), 0) + 1
        return cls.from_counts(counts)

    @classmethod
    def from_counts(cls, counts) -> "MRSequence":
        return cls(tuple(sorted(((p, k) for p, k in counts.items() if k), key=lambda t: pair_key(t[0]))))

    @property
    def counts(self) -> dict:
        return dict(self.items)

    @property
    def length(self) -> int:
        return sum(k for _, k in self.items)

    @property
    def max_multiplicity(self) -> int:
        return max((k for _, k in self.items), default=0)

    def pairs(self) -> list:
        """The sequence written out, each pair repeated by its multiplicity."""
        return [p for p, k in self.items for _ in range(k)]

    def describe(self, instance: Instance) -> str:
        return " ".join(
            instance.fmt_pair(p) + (f"x{k}" if k > 1 else "") for p, k in self.items
        )


def _guard(instance: Instance):
    if instance.n > MAX_MR_ALTERNATIVES:
        raise InstanceTooLarge(f"ranking maximisation is limited to {MAX_MR_ALTERNATIVES} alternatives")


def mr_polynomial(ds: IncompleteDataset, seq: MRSequence) -> Fraction:
    """Exact value of the polynomial, maximising over all rankings."""
    inst = ds.instance
    _guard(inst)
    for (d, x), _ in seq.items:
        if not (d >> x & 1 and inst.is_observable(d, x)):
            raise PairNotObservable(f"pair {inst.fmt_pair((d, x))} is not observable")
    best = max(
        sum(k for (d, x), k in seq.items if top(r, d) == x) for r in all_rankings(inst.n)
    )
    return best - sum((k * ds.freq[p] for p, k in seq.items), Fraction(0))


def _redundant_menu(counts: dict):
    menus = {d for d, _ in counts}
    for d in sorted(menus, key=lambda m: (popcount(m), bits(m))):
        if all(counts.get((d, y), 0) > 0 for y in bits(d)):
            return d
    return None


def is_redundant(seq: MRSequence) -> bool:
    """True when some menu of the sequence has all of its pairs present."""
    return _redundant_menu(seq.counts) is not None


def reduce_sequence(seq: MRSequence) -> MRSequence:
    """Strip redundant sub-multisets (one copy of every pair of a menu) until none is left."""
    counts = seq.counts
    while (d := _redundant_menu(counts)) is not None:
        for y in bits(d):
            counts[(d, y)] -= 1
    return MRSequence.from_counts(counts)


def bm_encoding_sequence(n: int, menu: int, y: int) -> MRSequence:
    """Sequence over all pairs of ``n`` alternatives whose polynomial equals ``K(rho, menu, y)``.

    Start from one copy of every pair, then add a copy of ``(D, y)`` for
    supersets ``D`` at odd distance from ``menu`` and drop it at even
    distance.  The copy of every pair contributes ``2^n - 1`` to both terms,
    and the adjustments contribute ``-K``, so the maximum over rankings is
    ``2^n - 1`` and the polynomial is ``K``.
    """
    full = (1 << n) - 1
    if not menu >> y & 1:
        raise ValueError("the alternative must belong to the menu")
    counts = {(d, x): 1 for d in range(1, full + 1) for x in bits(d)}
    for d in supersets(menu, full):
        counts[(d, y)] += 1 if popcount(d & ~menu) % 2 else -1
    return MRSequence.from_counts(counts)


# ---------------------------------------------------------------------------
# bounded-multiplicity membership

@dataclass
class MRVerdict:
    """Outcome of ``check_mr``.

    Attributes:
        member: no examined sequence has a negative polynomial.
        m: the multiplicity bound.
        exhaustive: every eligible multiset was examined.
        examined: number of non-redundant multisets evaluated.
        violation: first violating sequence, if any.
        value: its polynomial value.
    """

    member: bool
    m: int
    exhaustive: bool
    examined: int
    violation: MRSequence | None = None
    value: Fraction | None = None

    def to_dict(self, instance: Instance) -> dict:
        out = {
            "member": self.member,
            "m": self.m,
            "mode": "exhaustive" if self.exhaustive else "sampled, not exhaustive",
            "examined": self.examined,
        }
        if self.violation is not None:
            out["violation"] = [
                {"menu": instance.names(d), "alternative": instance.alternatives[x], "multiplicity": k}
                for (d, x), k in self.violation.items
            ]
            out["value"] = str(self.value)
        return out


class _Evaluator:
    """Vectorised polynomial values for batches of multiplicity vectors.

    Indicator rows are computed once per ranking and reused for every batch;
    frequencies are scaled to integers so the batch arithmetic is exact.
    """

    def __init__(self, ds: IncompleteDataset, m: int):
        inst = ds.instance
        self.pairs = list(inst.observable_pairs)
        ranks = all_rankings(inst.n)
        self.scale = lcm(*(ds.freq[p].denominator for p in self.pairs)) if self.pairs else 1
        bound = m * len(self.pairs) * self.scale
        self.dtype = np.int64 if bound < 2 ** 62 else object
        self.ind = np.array(
            [[int(top(r, d) == x) for d, x in self.pairs] for r in ranks], dtype=self.dtype
        ).reshape(len(ranks), len(self.pairs))
        self.rho = np.array([int(ds.freq[p] * self.scale) for p in self.pairs], dtype=self.dtype)
        index = {p: i for i, p in enumerate(self.pairs)}
        # menus whose pairs are all observable can make a sequence redundant
        self.groups = []
        for d in sorted({d for d, _ in self.pairs}, key=lambda m_: (popcount(m_), bits(m_))):
            if all((d, y) in index for y in bits(d)):
                self.groups.append([index[(d, y)] for y in bits(d)])

    def values(self, mult: np.ndarray):
        """Scaled polynomial values and an eligibility mask for a batch."""
        mult = mult.astype(self.dtype)
        best = (mult @ self.ind.T).max(axis=1) if len(self.ind) else np.zeros(len(mult), dtype=self.dtype)
        vals = best * self.scale - mult @ self.rho
        ok = mult.sum(axis=1) > 0
        for g in self.groups:
            ok &= ~np.all(mult[:, g] > 0, axis=1)
        return vals, ok

    def sequence(self, row) -> MRSequence:
        return MRSequence.from_counts({p: int(k) for p, k in zip(self.pairs, row)})


def _digits(start: int, stop: int, base: int, width: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the product order, first pair most significant."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), width), dtype=np.int64)
    for j in range(width - 1, -1, -1):
        out[:, j] = idx % base
        idx //= base
    return out


def check_mr(
    ds: IncompleteDataset,
    m: int,
    budget: int | None = None,
    seed: int = 0,
    limit: int = EXHAUSTIVE_LIMIT,
) -> MRVerdict:
    """Membership test for the datasets passing every non-redundant sequence of multiplicity at most ``m``.

    All ``(m+1)^P`` multiplicity vectors over the ``P`` observable pairs are
    swept in product order when that count is within ``limit``; the first
    violation in that order is reported.  Otherwise ``budget`` random vectors
    are drawn (reproducibly from ``seed``) and the verdict is marked sampled.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    _guard(ds.instance)
    ev = _Evaluator(ds, m)
    width = len(ev.pairs)
    total = (m + 1) ** width
    examined = 0
    if total <= limit:
        for start in range(0, total, CHUNK):
            batch = _digits(start, min(total, start + CHUNK), m + 1, width)
            vals, ok = ev.values(batch)
            examined += int(ok.sum())
            bad = np.flatnonzero(ok & (vals < 0))
            if len(bad):
                i = bad[0]
                return MRVerdict(False, m, True, examined, ev.sequence(batch[i]), Fraction(int(vals[i]), ev.scale))
        return MRVerdict(True, m, True, examined)
    if budget is None:
        raise InstanceTooLarge(
            f"{total} multisets exceed the exhaustive limit {limit}; pass a sampling budget"
        )
    rng = np.random.default_rng(seed)
    done = 0
    while done < budget:
        size = min(CHUNK, budget - done)
        batch = rng.integers(0, m + 1, size=(size, width))
        done += size
        vals, ok = ev.values(batch)
        examined += int(ok.sum())
        bad = np.flatnonzero(ok & (vals < 0))
        if len(bad):
            i = bad[0]
            return MRVerdict(False, m, False, examined, ev.sequence(batch[i]), Fraction(int(vals[i]), ev.scale))
    return MRVerdict(True, m, False, examined)


# ---------------------------------------------------------------------------
# gap search

@dataclass
class GapSearch:
    """Result of searching for a dataset accepted at ``m`` yet not rationalizable."""

    m: int
    attempts: int
    found: IncompleteDataset | None
    verdict: MRVerdict | None


def search_mr_gap(datasets, m: int = 1, budget: int | None = None, seed: int = 0) -> GapSearch:
    """Scan ``datasets`` for one that passes ``check_mr`` at ``m`` but fails the exact check."""
    attempts = 0
    for ds in datasets:
        attempts += 1
        if check_theorem(ds, certificate=False).verdict:
            continue
        v = check_mr(ds, m, budget=budget, seed=seed)
        if v.member:
            return GapSearch(m, attempts, ds, v)
    return GapSearch(m, attempts, None, None)


def complete_instance(n: int) -> Instance:
    return build_instance([chr(ord("a") + i) for i in range(n)], (), "all")


def multisets(pairs, m: int):
    """All nonzero multiplicity vectors over ``pairs`` in product order (small cases)."""
    for row in itertools.product(range(m + 1), repeat=len(pairs)):
        if any(row):
            yield MRSequence.from_counts(dict(zip(pairs, row)))

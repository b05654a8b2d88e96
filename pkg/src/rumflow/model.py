"""Alternatives, menus and choice datasets.

Sets of alternatives are encoded as integer bitmasks over the position of
each alternative in ``Instance.alternatives``.  A *pair* ``(D, x)`` is a menu
mask together with the index of the chosen alternative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .errors import (
    EmptyMenu,
    ExtraPair,
    InvalidInstance,
    MissingPair,
    NegativeFrequency,
    NotUpperSet,
    ParseError,
    SumExceedsOne,
    SumNotOne,
    UnknownAlternative,
)

MAX_ALTERNATIVES = 20

Pair = tuple  # (menu mask, alternative index)


# ---------------------------------------------------------------------------
# bitmask helpers

def popcount(mask: int) -> int:
    return bin(mask).count("1")


def bits(mask: int) -> list[int]:
    """Indices set in ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def submasks(mask: int) -> Iterator[int]:
    """All subsets of ``mask`` including ``mask`` and 0, descending order."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def supersets(mask: int, full: int) -> Iterator[int]:
    """All sets ``E`` with ``mask <= E <= full``."""
    rest = full & ~mask
    for extra in submasks(rest):
        yield mask | extra


def set_key(mask: int) -> tuple:
    """Canonical sort key: by size, then lexicographically by member indices."""
    return (popcount(mask), bits(mask))


def pair_key(pair: Pair) -> tuple:
    return (set_key(pair[0]), pair[1])


# ---------------------------------------------------------------------------
# exact numbers

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIO = re.compile(r"^\s*([+-]?\d+)\s*/\s*([+-]?\d+)\s*$")


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings or "num/den" strings exactly.

    Floats are refused: their binary expansion is rarely what was meant.
    """
    if isinstance(value, bool):
        raise ParseError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(f"floats are not accepted, pass a string instead: {value!r}")
    if isinstance(value, str):
        text = value.strip()
        m = _RATIO.match(text)
        if m:
            den = int(m.group(2))
            if den == 0:
                raise ParseError(f"zero denominator in {value!r}")
            return Fraction(int(m.group(1)), den)
        if _DECIMAL.match(text):
            return Fraction(text)
        raise ParseError(f"cannot parse probability {value!r}")
    raise ParseError(f"unsupported number type {type(value).__name__}")


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_decimal(q: Fraction, digits: int = 6) -> str:
    """Round half away from zero to ``digits`` places."""
    scale = 10 ** digits
    n = abs(q) * scale
    r = int(n)
    if n - r >= Fraction(1, 2):
        r += 1
    sign = "-" if q < 0 and r != 0 else ""
    whole, frac = divmod(r, scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


# ---------------------------------------------------------------------------
# instances

@dataclass(frozen=True, eq=True)
class Instance:
    """A choice environment: alternatives ``X``, hidden ones ``X*``, menus ``D``.

    Attributes:
        alternatives: names of the alternatives, in index order.
        unobservable: bitmask of alternatives whose choice is never recorded.
        menu_masks: the menu family, or ``None`` for every nonempty subset.
    """

    alternatives: tuple
    unobservable: int
    menu_masks: frozenset | None = None

    # -- basic geometry -----------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.alternatives)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def observable(self) -> int:
        return self.full & ~self.unobservable

    @property
    def all_menus(self) -> bool:
        return self.menu_masks is None

    @cached_property
    def menus(self) -> tuple:
        """Menus in canonical order."""
        if self.menu_masks is None:
            return tuple(sorted(range(1, self.full + 1), key=set_key))
        return tuple(sorted(self.menu_masks, key=set_key))

    def has_menu(self, mask: int) -> bool:
        if self.menu_masks is None:
            return mask != 0
        return mask in self.menu_masks

    def is_observable(self, menu: int, x: int) -> bool:
        """``(menu, x)`` observable: x is in the menu, not hidden, menu offered."""
        return bool(menu >> x & 1) and not (self.unobservable >> x & 1) and self.has_menu(menu)

    @cached_property
    def observable_pairs(self) -> tuple:
        out = []
        for d in self.menus:
            for x in bits(d & self.observable):
                out.append((d, x))
        return tuple(out)

    @cached_property
    def hidden_pairs(self) -> tuple:
        out = []
        for d in sorted(range(1, self.full + 1), key=set_key):
            for x in bits(d):
                if not self.is_observable(d, x):
                    out.append((d, x))
        return tuple(out)

    # -- names --------------------------------------------------------------
    def index(self, name) -> int:
        try:
            return self.alternatives.index(name)
        except ValueError:
            raise UnknownAlternative(f"unknown alternative {name!r}") from None

    def mask(self, names: Iterable) -> int:
        return mask_of(self.index(a) for a in names)

    def names(self, mask: int) -> list:
        return [self.alternatives[i] for i in bits(mask)]

    def fmt_set(self, mask: int) -> str:
        return "{" + ",".join(str(a) for a in self.names(mask)) + "}"

    def fmt_pair(self, pair: Pair) -> str:
        return f"({self.fmt_set(pair[0])},{self.alternatives[pair[1]]})"

    def pair(self, menu, alt) -> Pair:
        """Normalise a pair given as (mask, index) or as (menu names, name)."""
        d = menu if isinstance(menu, int) else self.mask(menu)
        x = alt if isinstance(alt, int) else self.index(alt)
        if not d >> x & 1:
            raise ExtraPair(f"alternative {self.alternatives[x]!r} is not in menu {self.fmt_set(d)}")
        return (d, x)

    def relabel(self, perm: list) -> "Instance":
        """Instance whose alternative at new position ``k`` is old ``perm[k]``."""
        inv = {old: new for new, old in enumerate(perm)}

        def move(m):
            return mask_of(inv[i] for i in bits(m))

        menus = None if self.menu_masks is None else frozenset(move(m) for m in self.menu_masks)
        return Instance(tuple(self.alternatives[i] for i in perm), move(self.unobservable), menus)


def build_instance(alternatives, unobservable=(), menus="all") -> Instance:
    """Validate and encode an instance.

    ``menus`` is the token ``"all"`` or an iterable of menus, each an iterable
    of alternative names.  The family must be closed under supersets.
    """
    alts = tuple(alternatives)
    if not alts:
        raise InvalidInstance("at least one alternative is required")
    if len(set(alts)) != len(alts):
        raise InvalidInstance("alternatives must be distinct")
    if len(alts) > MAX_ALTERNATIVES:
        raise InvalidInstance(f"at most {MAX_ALTERNATIVES} alternatives are supported")
    index = {a: i for i, a in enumerate(alts)}

    def encode(names):
        m = 0
        for a in names:
            if a not in index:
                raise UnknownAlternative(f"unknown alternative {a!r}")
            m |= 1 << index[a]
        return m

    hidden = encode(unobservable)
    if isinstance(menus, str):
        if menus != "all":
            raise InvalidInstance(f"menu spec must be 'all' or a list, got {menus!r}")
        return Instance(alts, hidden, None)

    family = set()
    for menu in menus:
        if isinstance(menu, str):
            raise InvalidInstance(f"menu must be a list of alternatives, got {menu!r}")
        m = encode(menu)
        if m == 0:
            raise EmptyMenu("menus must be nonempty")
        family.add(m)
    full = (1 << len(alts)) - 1
    for d in sorted(family, key=set_key):
        for i in range(len(alts)):
            e = d | (1 << i)
            if e not in family:
                inst = Instance(alts, hidden, frozenset(family))
                raise NotUpperSet(
                    f"menu family is not an upper set: {inst.fmt_set(d)} is a menu but "
                    f"{inst.fmt_set(e)} is not",
                    missing=e,
                )
    if len(family) == full:
        return Instance(alts, hidden, None)
    return Instance(alts, hidden, frozenset(family))


# ---------------------------------------------------------------------------
# datasets

@dataclass(frozen=True)
class IncompleteDataset:
    """Choice frequencies on the observable pairs of an instance."""

    instance: Instance
    freq: Mapping = field(compare=True)

    def rho(self, menu: int, x: int) -> Fraction:
        return self.freq[(menu, x)]

    def get(self, menu, alt) -> Fraction:
        return self.freq[self.instance.pair(menu, alt)]


@dataclass(frozen=True)
class CompleteDataset:
    """Choice frequencies on every pair ``x in D``, ``D`` a nonempty subset."""

    alternatives: tuple
    freq: Mapping

    @property
    def n(self) -> int:
        return len(self.alternatives)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def rho(self, menu: int, x: int) -> Fraction:
        return self.freq.get((menu, x), Fraction(0))

    def restrict(self, instance: Instance) -> IncompleteDataset:
        """Project onto the observable pairs of ``instance``."""
        return validate_dataset(instance, {p: self.rho(*p) for p in instance.observable_pairs})


def complete_dataset(alternatives, freq: Mapping) -> CompleteDataset:
    """Check row sums and ranges of a complete dataset."""
    alts = tuple(alternatives)
    n = len(alts)
    clean = {}
    for (d, x), v in freq.items():
        if not d >> x & 1:
            raise ExtraPair(f"pair with alternative outside its menu: {(d, x)}")
        v = to_fraction(v)
        if v < 0:
            raise NegativeFrequency(f"negative frequency at {(d, x)}")
        clean[(d, x)] = v
    for d in range(1, 1 << n):
        s = sum((clean.get((d, x), Fraction(0)) for x in bits(d)), Fraction(0))
        if s != 1:
            raise SumNotOne(f"frequencies on menu {bits(d)} sum to {s}, expected 1")
    out = {}
    for d in sorted(range(1, 1 << n), key=set_key):
        for x in bits(d):
            out[(d, x)] = clean.get((d, x), Fraction(0))
    return CompleteDataset(alts, out)


def _normalise_key(instance: Instance, key) -> Pair:
    menu, alt = key
    return instance.pair(menu, alt)


def validate_dataset(instance: Instance, freq: Mapping) -> IncompleteDataset:
    """Check frequencies against the observable pairs of ``instance``.

    Keys may be ``(mask, index)`` pairs or ``(menu names, alternative name)``.
    Menus with no hidden alternative must sum to one; the others to at most one.
    """
    values = {}
    for key, v in freq.items():
        pair = _normalise_key(instance, key)
        if pair in values:
            raise ExtraPair(f"duplicate pair {instance.fmt_pair(pair)}")
        values[pair] = to_fraction(v)
    observable = set(instance.observable_pairs)
    for pair in sorted(values, key=pair_key):
        if pair not in observable:
            raise ExtraPair(f"pair {instance.fmt_pair(pair)} is not observable")
    for pair in instance.observable_pairs:
        if pair not in values:
            raise MissingPair(f"missing frequency for {instance.fmt_pair(pair)}")
        v = values[pair]
        if v < 0:
            raise NegativeFrequency(f"negative frequency {v} at {instance.fmt_pair(pair)}")
        if v > 1:
            raise SumExceedsOne(f"frequency {v} above one at {instance.fmt_pair(pair)}")
    for d in instance.menus:
        s = sum((values[(d, x)] for x in bits(d & instance.observable)), Fraction(0))
        if d & instance.unobservable:
            if s > 1:
                raise SumExceedsOne(f"observable frequencies on {instance.fmt_set(d)} sum to {s} > 1")
        elif s != 1:
            raise SumNotOne(f"frequencies on {instance.fmt_set(d)} sum to {s}, expected 1")
    ordered = {p: values[p] for p in instance.observable_pairs}
    return IncompleteDataset(instance, ordered)


def infer_singleton_hidden(ds: IncompleteDataset) -> dict:
    """Hidden frequencies pinned down by a menu with exactly one hidden alternative."""
    inst = ds.instance
    out = {}
    for d in inst.menus:
        h = d & inst.unobservable
        if h and h & (h - 1) == 0:
            x = bits(h)[0]
            s = sum((ds.freq[(d, y)] for y in bits(d & inst.observable)), Fraction(0))
            out[(d, x)] = 1 - s
    return out

"""Datasets that violate exactly one of the rationalizability inequalities.

Each witness is assembled as a signed unit flow on the lattice out of a few
weighted source-to-sink paths, turned into a complete dataset by superset
sums, and projected onto the observable pairs.  Paths are chosen
lexicographically smallest among the admissible ones, so the output is
deterministic.  Every construction re-checks itself before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bm import flow_to_complete
from .errors import MenusNotFull, NegativeProbability, NotEssential, PairNotEligible
from .flows import LatticeFlow, combine, path_flow
from .model import IncompleteDataset, Instance, popcount, set_key, submasks
from .network import delta_flow
from .theorem import TestCollection, check_theorem, enumerate_essential_test_collections

EPSILON = Fraction(1, 2)
MAX_HALVINGS = 64


@dataclass(frozen=True)
class Witness:
    """A constructed counterexample together with the flow it came from."""

    dataset: IncompleteDataset
    flow: LatticeFlow
    alpha: Fraction


def lex_path(n: int, start: int, waypoints, avoid_nodes=frozenset(), avoid_arcs=frozenset()):
    """Smallest path (by added elements) from ``start`` through each waypoint.

    Waypoints form a chain ``start <= w1 <= ... <= wk``; the path ends at
    ``wk``.  Returns a list of arcs ``(head, x)`` or ``None``.
    """
    targets = list(waypoints)

    def go(node, k):
        while k < len(targets) and node == targets[k]:
            k += 1
        if k == len(targets):
            return []
        goal = targets[k]
        for x in range(n):
            bit = 1 << x
            if goal & bit and not node & bit:
                nxt = node | bit
                if nxt in avoid_nodes or (nxt, x) in avoid_arcs:
                    continue
                rest = go(nxt, k)
                if rest is not None:
                    return [(nxt, x)] + rest
        return None

    return go(start, 0)


def _require(path, what):
    if path is None:
        raise RuntimeError(f"no admissible path for {what}")
    return path


def essential_nodes(instance: Instance) -> frozenset:
    """Nodes lying in some essential test collection of the full menu family."""
    obs, hidden = instance.observable, instance.unobservable
    out = set()
    if hidden == 0:
        return frozenset()
    for a in submasks(obs):
        if a == 0 or a == obs:
            continue
        for e in submasks(hidden):
            if e:
                out.add(a | e)
    return frozenset(out)


def _check_full(instance: Instance):
    if not instance.all_menus:
        raise MenusNotFull("witnesses are built for the family of all nonempty menus")


def _single_violation(ds: IncompleteDataset, target) -> bool:
    rep = check_theorem(ds, certificate=False)
    if rep.violation_count != 1:
        return False
    if isinstance(target, TestCollection):
        return bool(rep.condition_ii_violations) and rep.condition_ii_violations[0][0] == target
    d, x = target
    return bool(rep.condition_i_violations) and rep.condition_i_violations[0][:2] == (d, x)


def build_witness_condition_ii(instance: Instance, target: TestCollection) -> Witness:
    """Counterexample for one essential test collection, with its flow."""
    _check_full(instance)
    if target.hidden != instance.unobservable or target.observable != instance.observable:
        raise NotEssential("target collection belongs to a different instance")
    if not target.essential:
        raise NotEssential("target collection is not essential")
    n, full = instance.n, instance.full
    obs, hidden = instance.observable, instance.unobservable
    eps = EPSILON
    hat = essential_nodes(instance)
    c_star = sorted(target.members, key=set_key)
    a_star = target.base

    pi1 = path_flow(n, _require(lex_path(n, 0, [obs, full], hat), "first path"))
    pi3_arcs = _require(lex_path(n, a_star, [obs, full], hat), "third path")
    pi3 = path_flow(n, pi3_arcs)
    order = [x for _, x in pi3_arcs]

    def r1(d):
        e = d & ~a_star
        pi2 = path_flow(n, _require(lex_path(n, 0, [e, d]), "second path"))
        node, arcs = a_star, []
        for x in order:
            if e >> x & 1:
                node |= 1 << x
                arcs.append((node, x))
        pi4 = path_flow(n, arcs)
        return combine(n, [(1 - eps, pi1), (eps, pi2), (eps, pi3), (-eps, pi4)])

    def r2(d):
        a = d & obs
        pi5 = path_flow(n, _require(lex_path(n, 0, [a, d, obs | d, full]), "fifth path"))
        return combine(n, [(1 - eps, pi1), (eps, pi5)])

    size = len(c_star)
    r3 = combine(n, [(Fraction(1, size), r1(d)) for d in c_star])
    r4 = combine(n, [(Fraction(1, size), pi1), (Fraction(size - 1, size), r2(a_star | hidden))])
    r_hat = combine(n, [(Fraction(1, 2), r3), (Fraction(1, 2), r4)])

    others = [tc for tc in enumerate_essential_test_collections(instance) if tc != target]
    picks = set()
    for tc in others:
        outside = [d for d in tc.members if d not in target.members]
        if outside:
            picks.add(min(outside, key=set_key))
    picks = sorted(picks, key=set_key)
    spread = combine(n, [(Fraction(1, len(picks)), r2(d)) for d in picks]) if picks else None

    for k in range(MAX_HALVINGS + 1):
        alpha = Fraction(1, 2 ** k)
        if spread is None:
            r = r_hat
        else:
            r = combine(n, [(alpha, r_hat), (1 - alpha, spread)])
        if delta_flow(r, instance, target.members) >= 0:
            continue
        if any(delta_flow(r, instance, tc.members) < 0 for tc in others):
            continue
        try:
            ds = flow_to_complete(r, instance.alternatives).restrict(instance)
        except NegativeProbability:
            continue
        if _single_violation(ds, target):
            return Witness(ds, r, alpha)
        if spread is None:
            break
    raise RuntimeError("witness construction did not verify")


def witness_condition_ii(instance: Instance, target: TestCollection) -> IncompleteDataset:
    """Valid dataset whose only violated inequality is the one for ``target``."""
    return build_witness_condition_ii(instance, target).dataset


def build_witness_condition_i(instance: Instance, pair) -> Witness:
    """Counterexample for one polynomial inequality, with its flow."""
    _check_full(instance)
    d, x = pair
    n, full = instance.n, instance.full
    obs, hidden = instance.observable, instance.unobservable
    if not d >> x & 1 or hidden >> x & 1:
        raise PairNotEligible("the alternative must be observable and belong to the menu")
    if not 1 < popcount(d) < n:
        raise PairNotEligible("the menu must have more than one and fewer than all alternatives")
    eps = EPSILON
    hat = essential_nodes(instance)
    arc = (d, x)
    tail = d & ~(1 << x)
    avoid = frozenset([arc])

    pi1 = path_flow(n, _require(lex_path(n, 0, [obs, full], hat, avoid), "first path"))
    pi2 = path_flow(n, _require(lex_path(n, 0, [d & obs, d], avoid_arcs=avoid), "second path"))
    if ~d & obs:
        # leave the menu through an observable alternative outside it
        pi3 = lex_path(n, tail, [d | obs, full], avoid_nodes=frozenset([d]))
    else:
        # every observable alternative is in the menu: add the hidden ones first
        pi3 = lex_path(n, tail, [tail | hidden, full])
    pi3 = path_flow(n, _require(pi3, "third path"))
    r = combine(n, [(1 - eps, pi1), (eps, pi2), (-eps, path_flow(n, [arc])), (eps, pi3)])
    if r[arc] >= 0:
        raise RuntimeError("witness flow does not make the target arc negative")
    ds = flow_to_complete(r, instance.alternatives).restrict(instance)
    if not _single_violation(ds, (d, x)):
        raise RuntimeError("witness construction did not verify")
    return Witness(ds, r, Fraction(1))


def witness_condition_i(instance: Instance, pair) -> IncompleteDataset:
    """Valid dataset whose only violated inequality is ``K(rho, D, x) >= 0``."""
    return build_witness_condition_i(instance, pair).dataset

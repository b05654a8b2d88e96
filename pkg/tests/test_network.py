import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import uniform
from rumflow.bm import bm_table
from rumflow.errors import InconsistentBounds, NegativeArc, NotUnitFlow
from rumflow.flows import LatticeFlow, path_flow, ranking_path
from rumflow.model import build_instance
from rumflow.network import (
    CapacitatedLattice,
    build_network,
    decompose_flow,
    delta_flow,
    delta_rho,
    feasible_flow,
    node_deltas,
    to_dot,
)
from rumflow.oracle import GeneratorConfig, brute_force_rationalizable, random_mu, sample_instance


def _hidden_crossing(mu, inst, members):
    """Mass-weighted count of hidden arcs entering minus leaving ``members`` along each ranking."""
    total = Fraction(0)
    for r, w in mu.weights.items():
        for head, x in ranking_path(r):
            if inst.is_observable(head, x):
                continue
            tail = head & ~(1 << x)
            total += w * ((head in members) - (tail in members))
    return total


def _hoffman(net):
    """Cut oracle: pinned arcs nonnegative and every node set passes the supply test."""
    if net.negative_arcs():
        return False
    size = 1 << net.n
    full = size - 1
    for s in range(1 << size):
        inside = lambda v: s >> v & 1
        supply = inside(0) - inside(full)
        cap, low = Fraction(0), Fraction(0)
        unbounded = False
        for (head, x) in net.arcs:
            tail = head & ~(1 << x)
            if inside(tail) and not inside(head):
                if net.upper[(head, x)] is None:
                    unbounded = True
                    break
                cap += net.upper[(head, x)]
            elif inside(head) and not inside(tail):
                low += net.lower[(head, x)]
        if not unbounded and supply > cap - low:
            return False
    return True


def test_arc_counts_and_bounds(fixture_ds):
    ds = fixture_ds("transport")
    net = build_network(ds)
    assert len(net.arcs) == 32
    assert sum(net.observable.values()) == 6
    for arc in net.arcs:
        if net.observable[arc]:
            assert net.lower[arc] == net.upper[arc] == bm_table(ds)[arc]
        else:
            assert net.lower[arc] == 0 and net.upper[arc] is None


def test_delta_matches_hidden_crossings_uniform():
    inst = build_instance("abcd", ["c", "d"])
    mu = uniform("abcd")
    ds = mu.induced().restrict(inst)
    a, c, d = 1, 4, 8
    members = {a | c, a | d, a | c | d}
    value = delta_rho(ds, members)
    assert value == _hidden_crossing(mu, inst, members) == Fraction(1, 6)


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=1, max_value=255))
def test_delta_matches_hidden_crossings_random(seed, s):
    inst = build_instance("abc", ["c"])
    mu = random_mu("abc", random.Random(seed))
    members = {v for v in range(8) if s >> v & 1}
    assert delta_rho(mu.induced().restrict(inst), members) == _hidden_crossing(mu, inst, members)


def test_full_hidden_family_has_zero_delta():
    inst = build_instance("abcd", ["c", "d"])
    ds = uniform("abcd").induced().restrict(inst)
    a, c, d = 1, 4, 8
    assert delta_rho(ds, {a, a | c, a | d, a | c | d}) == 0


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=0, max_value=(1 << 16) - 1))
def test_delta_is_additive(seed, s):
    _, ds, _ = sample_instance(GeneratorConfig(n=4, hidden=2, mode="perturbed", seed=seed))
    nodes = node_deltas(ds)
    members = {v for v in range(16) if s >> v & 1}
    assert delta_rho(ds, members) == sum((nodes[v] for v in members), Fraction(0))


def test_delta_flow_agrees_with_polynomials(fixture_ds):
    ds = fixture_ds("school")
    flow = feasible_flow(build_network(ds))
    for members in ({1}, {1, 3, 7}, {31}, {0, 5, 9}):
        assert delta_flow(flow, ds.instance, members) == delta_rho(ds, members)


@pytest.mark.parametrize("mode", ["from-random-mu", "perturbed", "adversarial"])
def test_feasibility_matches_cut_oracle(mode):
    for seed in range(40):
        cfg = GeneratorConfig(n=3, hidden=seed % 3, mode=mode, seed=seed, menus=("full", "random-upper-set")[seed % 2])
        _, ds, _ = sample_instance(cfg)
        net = build_network(ds)
        flow = feasible_flow(net)
        assert (flow is not None) == _hoffman(net)
        assert (flow is not None) == (brute_force_rationalizable(ds) is not None)
        if flow is not None:
            assert flow.is_unit()
            for arc in net.arcs:
                assert flow[arc] >= net.lower[arc]
                if net.upper[arc] is not None:
                    assert flow[arc] <= net.upper[arc]


def test_negative_pinned_arc_is_infeasible():
    inst = build_instance("ab")
    lower = {(1, 0): Fraction(-1), (3, 1): Fraction(-1), (2, 1): Fraction(2), (3, 0): Fraction(2)}
    net = CapacitatedLattice(inst, lower, dict(lower), {a: True for a in lower})
    assert _hoffman(net) is False
    assert feasible_flow(net) is None


def test_inconsistent_bounds():
    inst = build_instance("ab")
    lower = {(1, 0): Fraction(1), (3, 1): Fraction(0), (2, 1): Fraction(0), (3, 0): Fraction(0)}
    upper = {**lower, (1, 0): Fraction(1, 2)}
    with pytest.raises(InconsistentBounds):
        feasible_flow(CapacitatedLattice(inst, lower, upper, {a: True for a in lower}))


@given(st.integers(min_value=2, max_value=4), st.integers(min_value=0, max_value=10 ** 6))
def test_decomposition_round_trip(n, seed):
    mu = random_mu([chr(97 + i) for i in range(n)], random.Random(seed))
    flow = mu.flow()
    back = decompose_flow(flow, mu.alternatives)
    assert back.total() == 1
    assert back.flow() == flow
    assert back.induced() == mu.induced()


def test_decomposition_rejects_bad_flows():
    with pytest.raises(NegativeArc):
        decompose_flow(path_flow(2, [(1, 0), (3, 1)], -1))
    with pytest.raises(NotUnitFlow):
        decompose_flow(path_flow(2, [(1, 0), (3, 1)], Fraction(1, 2)))
    with pytest.raises(NotUnitFlow):
        decompose_flow(LatticeFlow(2, {(1, 0): Fraction(1)}))


def test_dot_marks_observability():
    inst = build_instance("ab", ["b"])
    ds = uniform("ab").induced().restrict(inst)
    dot = to_dot(build_network(ds))
    assert dot.startswith("digraph lattice {")
    assert dot.count("style=dashed") == 2 and dot.count("style=solid") == 2

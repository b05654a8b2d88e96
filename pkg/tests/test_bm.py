import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import count_rankings, uniform
from rumflow.bm import bm_flow, bm_polynomial, bm_table, complete_bm, flow_to_complete
from rumflow.errors import ConservationViolated, NegativeProbability, UncomputablePair
from rumflow.flows import LatticeFlow, RankingDistribution, all_rankings, path_flow
from rumflow.model import bits, build_instance, popcount
from rumflow.oracle import random_mu, vertex_dataset
from rumflow.witness import build_witness_condition_i


def test_degenerate_ranking_two():
    inst = build_instance(["a", "b"])
    cds = vertex_dataset(inst, (0, 1))
    assert bm_polynomial(cds, 0b01, 0) == 0
    assert bm_polynomial(cds, 0b10, 1) == 1


def test_uniform_three():
    cds = uniform("abc").induced()
    # rankings with c above a above b
    oracle = count_rankings(3, lambda r: r.index(2) < r.index(0) < r.index(1))
    assert bm_polynomial(cds, 0b011, 0) == oracle == Fraction(1, 6)


def test_hidden_pair_is_uncomputable():
    inst = build_instance("abc", ["c"])
    ds = uniform("abc").induced().restrict(inst)
    assert bm_polynomial(ds, 0b101, 0) == bm_polynomial(uniform("abc").induced(), 0b101, 0)
    with pytest.raises(UncomputablePair):
        bm_polynomial(ds, 0b101, 2)


def test_table_uniform_two():
    inst = build_instance(["a", "b"])
    ds = uniform("ab").induced().restrict(inst)
    assert bm_table(ds).values == {(0b01, 0): Fraction(1, 2), (0b10, 1): Fraction(1, 2), (0b11, 0): Fraction(1, 2), (0b11, 1): Fraction(1, 2)}


def test_table_transport_keys(fixture_ds):
    ds = fixture_ds("transport")
    table = bm_table(ds)
    assert set(table.values) == set(ds.instance.observable_pairs)
    assert len(table) == 6


def test_table_empty_when_everything_hidden():
    inst = build_instance("ab", ["a", "b"])
    ds = uniform("ab").induced().restrict(inst)
    assert len(bm_table(ds)) == 0


def test_path_flow_to_dataset():
    r = path_flow(2, [(0b01, 0), (0b11, 1)])
    cds = flow_to_complete(r, ("a", "b"))
    assert cds.rho(0b11, 1) == 1 and cds.rho(0b11, 0) == 0
    assert cds.rho(0b01, 0) == 1 and cds.rho(0b10, 1) == 1


def test_signed_flow_with_nonnegative_sums():
    inst = build_instance("abcd", ["c", "d"])
    w = build_witness_condition_i(inst, (0b0011, 1))
    assert any(v < 0 for v in w.flow.values.values())
    cds = flow_to_complete(w.flow, inst.alternatives)
    for d in range(1, 16):
        assert sum(cds.rho(d, x) for x in bits(d)) == 1


def test_zero_flow_is_rejected():
    with pytest.raises(ConservationViolated):
        flow_to_complete(LatticeFlow(2, {}))


def test_negative_superset_sum_is_rejected():
    # one unit through a then b, minus a path, plus another: sums go negative at ({a,b}, a)
    r = path_flow(2, [(0b01, 0), (0b11, 1)], 2) + path_flow(2, [(0b10, 1), (0b11, 0)], -1)
    with pytest.raises(NegativeProbability):
        flow_to_complete(r)


def _dist(n, seed):
    return random_mu([chr(97 + i) for i in range(n)], random.Random(seed))


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=10 ** 6))
def test_mobius_round_trip(n, seed):
    cds = _dist(n, seed).induced()
    assert flow_to_complete(bm_flow(cds), cds.alternatives).freq == cds.freq


def test_vertex_polynomials_are_indicators():
    n = 5
    inst = build_instance("abcde")
    for r in all_rankings(n):
        k = complete_bm(vertex_dataset(inst, r))
        pos = {x: i for i, x in enumerate(r)}
        for (d, x), v in k.items():
            outside = [y for y in range(n) if not d >> y & 1]
            rest = [y for y in bits(d) if y != x]
            expect = all(pos[y] < pos[x] for y in outside) and all(pos[x] < pos[y] for y in rest)
            assert v == (1 if expect else 0)


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_polynomial_is_ranking_mass(seed):
    mu = _dist(4, seed)
    k = complete_bm(mu.induced())
    for (d, x), v in k.items():
        mass = sum(
            (w for r, w in mu.weights.items()
             if all(r.index(y) < r.index(x) for y in range(4) if not d >> y & 1)
             and all(r.index(x) < r.index(y) for y in bits(d) if y != x)),
            Fraction(0),
        )
        assert v == mass


def test_bm_flow_is_unit_flow():
    cds = _dist(4, 3).induced()
    assert bm_flow(cds).is_unit()
    assert sum(v for (d, _), v in bm_flow(cds).values.items() if popcount(d) == 1) == 1


def test_uniform_distribution_is_a_distribution():
    assert uniform("abcd").total() == 1
    assert isinstance(uniform("ab"), RankingDistribution)

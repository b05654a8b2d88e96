import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import uniform
from rumflow.document import dumps
from rumflow.errors import NoObservableData, NotRationalizable
from rumflow.flows import RankingDistribution, all_rankings
from rumflow.model import build_instance, infer_singleton_hidden, validate_dataset
from rumflow.oracle import (
    GeneratorConfig,
    brute_force_rationalizable,
    fit_logit,
    identified_set_oracle,
    logit_dataset,
    random_mu,
    sample_instance,
    vertex_dataset,
)
from rumflow.theorem import check_theorem, make_test_collection
from rumflow.witness import witness_condition_ii


def test_vertex_two():
    inst = build_instance("ab")
    v = vertex_dataset(inst, (0, 1))
    assert v.rho(0b11, 0) == 1 and v.rho(0b11, 1) == 0
    assert v.rho(0b01, 0) == 1 and v.rho(0b10, 1) == 1


def test_vertex_rows_sum_to_one():
    inst = build_instance("abcd")
    for r in all_rankings(4):
        v = vertex_dataset(inst, r)
        for d in range(1, 16):
            assert sum(v.rho(d, x) for x in range(4) if d >> x & 1) == 1


def test_vertex_average_is_uniform():
    inst = build_instance("abc")
    ranks = all_rankings(3)
    for d in range(1, 8):
        size = bin(d).count("1")
        for x in range(3):
            if d >> x & 1:
                avg = sum((vertex_dataset(inst, r).rho(d, x) for r in ranks), Fraction(0)) / len(ranks)
                assert avg == Fraction(1, size)


@given(st.lists(st.integers(min_value=0, max_value=5), min_size=6, max_size=6))
def test_vertex_mixtures_are_rationalizable(w):
    if not any(w):
        w = [1] + w[1:]
    inst = build_instance("abc", ["c"])
    total = sum(w)
    freq = {}
    for p in inst.observable_pairs:
        freq[p] = sum((Fraction(k, total) * vertex_dataset(inst, r).rho(*p) for k, r in zip(w, all_rankings(3))), Fraction(0))
    ds = validate_dataset(inst, freq)
    assert check_theorem(ds, certificate=False).verdict
    assert brute_force_rationalizable(ds) is not None


def test_brute_force_reproduces_observables(fixture_ds):
    ds = fixture_ds("transport")
    mu = brute_force_rationalizable(ds)
    assert mu.total() == 1
    induced = mu.induced()
    assert all(induced.rho(*p) == ds.freq[p] for p in ds.instance.observable_pairs)


def test_brute_force_refuses_witness():
    inst = build_instance("abcd", ["c", "d"])
    ds = witness_condition_ii(inst, make_test_collection(inst, inst.mask("a"), [inst.mask("c")]))
    assert brute_force_rationalizable(ds) is None
    with pytest.raises(NotRationalizable):
        identified_set_oracle(ds, inst.mask("acd"), inst.index("c"))


def test_everything_hidden_gives_uniform():
    inst = build_instance("abc", ["a", "b", "c"])
    ds = validate_dataset(inst, {})
    mu = brute_force_rationalizable(ds)
    assert mu == uniform("abc")


def test_oracle_point_intervals():
    _, ds, _ = sample_instance(GeneratorConfig(n=3, hidden=1, seed=5))
    inferred = infer_singleton_hidden(ds)
    for (d, x), v in inferred.items():
        iv = identified_set_oracle(ds, d, x)
        assert iv.lower == iv.upper == v
    full = build_instance("abcd", ["c", "d"], [["a", "b", "c", "d"]])
    ds = validate_dataset(full, {(("a", "b", "c", "d"), "a"): Fraction(1, 3), (("a", "b", "c", "d"), "b"): Fraction(2, 3)})
    iv = identified_set_oracle(ds, full.mask("abcd"), full.index("c"))
    assert (iv.lower, iv.upper) == (0, 0)


@pytest.mark.parametrize("menus", ["full", "random-upper-set"])
@pytest.mark.parametrize("mode", ["from-random-mu", "perturbed", "adversarial"])
def test_generator_is_deterministic(menus, mode):
    cfg = GeneratorConfig(n=4, hidden=2, menus=menus, mode=mode, seed=17)
    a, b = sample_instance(cfg), sample_instance(cfg)
    assert dumps(a[1]) == dumps(b[1])
    assert a[0] == b[0] and a[2] == b[2]


def test_generated_mu_data_is_rationalizable():
    for seed in range(20):
        _, ds, mu = sample_instance(GeneratorConfig(n=4, hidden=seed % 3, seed=seed))
        assert mu is not None
        assert check_theorem(ds, certificate=False).verdict


def test_large_perturbations_often_fail():
    fails = 0
    for seed in range(40):
        _, ds, _ = sample_instance(GeneratorConfig(n=4, hidden=1, mode="perturbed", magnitude=Fraction(1, 2), seed=seed))
        rep = check_theorem(ds, certificate=False)
        if not rep.verdict:
            fails += 1
            assert rep.violation_count > 0
    assert fails >= 10


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(mode="odd").validate()
    with pytest.raises(ValueError):
        GeneratorConfig(n=7).validate()
    with pytest.raises(ValueError):
        GeneratorConfig(n=3, hidden=4).validate()
    assert GeneratorConfig().to_dict()["magnitude"] == "1/10"


def test_random_mu_is_normalised():
    mu = random_mu("abcd", random.Random(2))
    assert mu.total() == 1
    assert isinstance(mu, RankingDistribution)


def _logit(params, menu, x):
    xs = [i for i in range(len(params)) if menu >> i & 1]
    return math.exp(params[x]) / sum(math.exp(params[i]) for i in xs)


def test_logit_round_trip():
    params = [0.0, 0.7, -0.4, 1.1, -0.9]
    inst = build_instance("abcde", ["d", "e"])
    ds = logit_dataset(inst, params)
    for d, x in inst.observable_pairs:
        assert abs(float(ds.freq[(d, x)]) - _logit(params, d, x)) < 1e-8
    fit = fit_logit(ds)
    assert fit.converged
    for d, x in inst.observable_pairs:
        assert abs(float(fit.dataset.freq[(d, x)]) - float(ds.freq[(d, x)])) < 1e-6
    assert check_theorem(fit.dataset, certificate=False).verdict


def test_logit_on_uniform_data():
    inst = build_instance("abcd", ["d"])
    ds = uniform("abcd").induced().restrict(inst)
    fit = fit_logit(ds)
    assert fit.converged
    assert all(abs(v) < 1e-6 for v in fit.params.values())


def test_logit_needs_data():
    with pytest.raises(NoObservableData):
        fit_logit(validate_dataset(build_instance("ab", ["a", "b"]), {}))

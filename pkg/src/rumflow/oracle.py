"""Brute-force reference computations and synthetic data.

The reference checks work directly with weights on all ``|X|!`` rankings and
share nothing with the lattice machinery beyond the exact solver, which makes
them a useful second opinion.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .bounds import IdentifiedInterval
from .errors import InstanceTooLarge, NoObservableData, NotRationalizable, PairObservable
from .flows import RankingDistribution, all_rankings, top
from .lp import LinearProgram, solve, verify
from .model import (
    CompleteDataset,
    IncompleteDataset,
    Instance,
    bits,
    build_instance,
    popcount,
    set_key,
    validate_dataset,
)
from .theorem import enumerate_essential_test_collections
from .witness import witness_condition_i, witness_condition_ii

MAX_ORACLE_ALTERNATIVES = 6


def vertex_dataset(instance: Instance, ranking) -> CompleteDataset:
    """Every menu chooses its best element under ``ranking`` (best-first indices)."""
    return RankingDistribution(instance.alternatives, {tuple(ranking): Fraction(1)}).induced()


def _guard(instance: Instance):
    if instance.n > MAX_ORACLE_ALTERNATIVES:
        raise InstanceTooLarge(f"ranking enumeration is limited to {MAX_ORACLE_ALTERNATIVES} alternatives")


def rationalizability_program(ds: IncompleteDataset) -> tuple:
    """Feasibility program over ranking weights: ``(program, rankings)``."""
    inst = ds.instance
    _guard(inst)
    ranks = all_rankings(inst.n)
    lp = LinearProgram()
    for _ in ranks:
        lp.add_variable(0, lower=0)
    lp.add_row({j: 1 for j in range(len(ranks))}, "==", 1)
    for d, x in inst.observable_pairs:
        coeffs = {j: 1 for j, r in enumerate(ranks) if top(r, d) == x}
        lp.add_row(coeffs, "==", ds.freq[(d, x)])
    return lp, ranks


def brute_force_rationalizable(ds: IncompleteDataset) -> RankingDistribution | None:
    """A distribution over rankings reproducing the observables, or ``None``."""
    inst = ds.instance
    lp, ranks = rationalizability_program(ds)
    if not inst.observable_pairs:
        share = Fraction(1, len(ranks))
        return RankingDistribution(inst.alternatives, {r: share for r in ranks})
    out = solve(lp)
    assert verify(lp, out)
    if out.status != "optimal":
        return None
    return RankingDistribution(inst.alternatives, {r: w for r, w in zip(ranks, out.x) if w != 0})


def identified_set_oracle(ds: IncompleteDataset, menu: int, x: int) -> IdentifiedInterval:
    """Interval of a hidden frequency by optimising directly over ranking weights."""
    inst = ds.instance
    if not menu >> x & 1 or inst.is_observable(menu, x):
        raise PairObservable(f"pair {inst.fmt_pair((menu, x))} is not hidden")
    ends = []
    for maximize in (False, True):
        lp, ranks = rationalizability_program(ds)
        lp.maximize = maximize
        for j, r in enumerate(ranks):
            if top(r, menu) == x:
                lp.objective[j] = Fraction(1)
        out = solve(lp)
        assert verify(lp, out)
        if out.status != "optimal":
            raise NotRationalizable("no ranking distribution reproduces the observables")
        ends.append(out.value)
    return IdentifiedInterval((menu, x), ends[0], ends[1], "oracle")


# ---------------------------------------------------------------------------
# generator

MENU_MODES = ("full", "random-upper-set")
DATA_MODES = ("from-random-mu", "perturbed", "adversarial")


@dataclass(frozen=True)
class GeneratorConfig:
    """Recipe for one synthetic instance.

    Attributes:
        n: number of alternatives (named ``a``, ``b``, ... or ``0``, ``1``, ...).
        hidden: number of hidden alternatives, taken from the end of the list.
        menus: ``full`` or ``random-upper-set``.
        mode: ``from-random-mu``, ``perturbed`` or ``adversarial``.
        magnitude: size of the perturbation (``perturbed`` mode).
        seed: fully determines the output.
        numeric_names: name alternatives ``0..n-1`` instead of letters.
    """

    n: int = 4
    hidden: int = 2
    menus: str = "full"
    mode: str = "from-random-mu"
    magnitude: Fraction = Fraction(1, 10)
    seed: int = 0
    numeric_names: bool = False

    def validate(self):
        if self.menus not in MENU_MODES:
            raise ValueError(f"unknown menu mode {self.menus!r}")
        if self.mode not in DATA_MODES:
            raise ValueError(f"unknown dataset mode {self.mode!r}")
        if not 1 <= self.n <= MAX_ORACLE_ALTERNATIVES:
            raise ValueError("n must be between 1 and 6")
        if not 0 <= self.hidden <= self.n:
            raise ValueError("hidden must be between 0 and n")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["magnitude"] = str(Fraction(self.magnitude))
        return d


def _names(cfg: GeneratorConfig) -> list:
    if cfg.numeric_names:
        return [str(i) for i in range(cfg.n)]
    return [chr(ord("a") + i) for i in range(cfg.n)]


def random_mu(alternatives, rng: random.Random) -> RankingDistribution:
    """Integer weights in ``[0, 2^16]`` on every ranking, normalised."""
    ranks = all_rankings(len(alternatives))
    w = [rng.randint(0, 1 << 16) for _ in ranks]
    if sum(w) == 0:
        w[0] = 1
    total = sum(w)
    return RankingDistribution(tuple(alternatives), {r: Fraction(v, total) for r, v in zip(ranks, w) if v})


def _random_menus(n: int, rng: random.Random) -> list:
    full = (1 << n) - 1
    gens = [rng.randint(1, full) for _ in range(rng.randint(1, 3))]
    fam = {d for d in range(1, full + 1) if any(d & g == g for g in gens)}
    return sorted(fam, key=set_key)


def _perturb(ds: IncompleteDataset, magnitude: Fraction, rng: random.Random) -> IncompleteDataset:
    """Shift one observable frequency, keeping the dataset valid."""
    inst = ds.instance
    freq = dict(ds.freq)
    menus = [d for d in inst.menus if d & inst.observable]
    d = rng.choice(menus)
    xs = bits(d & inst.observable)
    x = rng.choice(xs)
    sign = rng.choice((1, -1))
    if d & inst.unobservable:
        room_up = 1 - sum(freq[(d, y)] for y in xs)
        step = min(magnitude, room_up) if sign > 0 else -min(magnitude, freq[(d, x)])
        if step == 0:
            step = -min(magnitude, freq[(d, x)]) if sign > 0 else min(magnitude, room_up)
        freq[(d, x)] += step
    else:
        others = [y for y in xs if y != x]
        if others:
            y = rng.choice(others)
            # move mass from y to x (or back), staying inside [0, 1]
            step = min(magnitude, freq[(d, y)]) if sign > 0 else -min(magnitude, freq[(d, x)])
            freq[(d, x)] += step
            freq[(d, y)] -= step
    return validate_dataset(inst, freq)


def _adversarial(inst: Instance, full_inst: Instance, mu: RankingDistribution, rng: random.Random):
    """Mix a random rationalizable dataset with a single-violation witness."""
    targets = list(enumerate_essential_test_collections(full_inst))
    targets += [p for p in full_inst.observable_pairs if 1 < popcount(p[0]) < full_inst.n]
    base = mu.induced()
    if not targets:
        return base.restrict(inst)
    t = rng.choice(targets)
    if isinstance(t, tuple):
        w = witness_condition_i(full_inst, t)
    else:
        w = witness_condition_ii(full_inst, t)
    lam = Fraction(rng.randint(1, 7), 8)
    freq = {p: lam * w.freq[p] + (1 - lam) * base.rho(*p) for p in inst.observable_pairs}
    return validate_dataset(inst, freq)


def sample_instance(cfg: GeneratorConfig):
    """Draw ``(instance, dataset, mu)``; ``mu`` is ``None`` when the data was altered."""
    cfg.validate()
    rng = random.Random(cfg.seed)
    names = _names(cfg)
    hidden = names[cfg.n - cfg.hidden:]
    if cfg.menus == "full":
        inst = build_instance(names, hidden, "all")
    else:
        menus = _random_menus(cfg.n, rng)
        inst = build_instance(names, hidden, [[names[i] for i in bits(d)] for d in menus])
    mu = random_mu(names, rng)
    ds = mu.induced().restrict(inst)
    if cfg.mode == "from-random-mu":
        return inst, ds, mu
    if cfg.mode == "perturbed":
        if not inst.observable_pairs:
            return inst, ds, mu
        return inst, _perturb(ds, Fraction(cfg.magnitude), rng), None
    full_inst = build_instance(names, hidden, "all")
    return inst, _adversarial(inst, full_inst, mu, rng), None


# ---------------------------------------------------------------------------
# logit calibration

@dataclass
class LogitFit:
    """Result of a logit calibration.

    Attributes:
        params: utility index per alternative; the first is fixed at 0.
        loss: squared deviation at the fitted parameters.
        grad_norm: gradient norm at termination.
        iterations: gradient steps taken.
        converged: the gradient norm fell below the tolerance.
        dataset: calibrated observable frequencies, exact rationals.
    """

    params: dict
    loss: float
    grad_norm: float
    iterations: int
    converged: bool
    dataset: IncompleteDataset


def logit_probabilities(n: int, params, menu: int) -> dict:
    xs = bits(menu)
    m = max(params[i] for i in xs)
    w = {i: math.exp(params[i] - m) for i in xs}
    s = sum(w.values())
    return {i: w[i] / s for i in xs}


def logit_dataset(instance: Instance, params, grid: int = 10 ** 9) -> IncompleteDataset:
    """Logit frequencies on every menu, snapped to ``1/grid`` and projected.

    Snapping uses largest remainders on each full menu so rows still sum to 1.
    """
    freq = {}
    for d in instance.menus:
        p = logit_probabilities(instance.n, params, d)
        xs = sorted(p)
        raw = [p[i] * grid for i in xs]
        floor = [int(math.floor(v)) for v in raw]
        short = grid - sum(floor)
        order = sorted(range(len(xs)), key=lambda k: (-(raw[k] - floor[k]), k))
        for k in order[:short]:
            floor[k] += 1
        for i, v in zip(xs, floor):
            if instance.is_observable(d, i):
                freq[(d, i)] = Fraction(v, grid)
    return validate_dataset(instance, freq)


def fit_logit(ds: IncompleteDataset, tol: float = 1e-10, max_iter: int = 200000, grid: int = 10 ** 9) -> LogitFit:
    """Least-squares logit fit over the observable pairs by gradient descent.

    The loss sums ``(p(D, x) - rho(D, x))^2`` over every observable pair; the
    first alternative's index is pinned at zero.  The calibrated dataset is
    the fitted logit snapped to ``1/grid``.
    """
    inst = ds.instance
    pairs = inst.observable_pairs
    if not pairs:
        raise NoObservableData("logit calibration needs at least one observable pair")
    n = inst.n
    menus = sorted({d for d, _ in pairs}, key=set_key)
    # membership matrix and observed targets per menu
    member = np.array([[1.0 if d >> i & 1 else 0.0 for i in range(n)] for d in menus])
    target = np.zeros((len(menus), n))
    observed = np.zeros((len(menus), n))
    row = {d: k for k, d in enumerate(menus)}
    for d, x in pairs:
        target[row[d], x] = float(ds.freq[(d, x)])
        observed[row[d], x] = 1.0

    def model(a):
        z = np.where(member > 0, a[None, :], -np.inf)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z) * member
        return e / e.sum(axis=1, keepdims=True)

    def loss_grad(a):
        p = model(a)
        resid = (p - target) * observed
        loss = float((resid ** 2).sum())
        # dp_x/da_j = p_x (1{x=j} - p_j)
        g_p = 2 * resid
        inner = (g_p * p).sum(axis=1, keepdims=True)
        grad = (p * (g_p - inner)).sum(axis=0)
        grad[0] = 0.0
        return loss, grad

    a = np.zeros(n)
    loss, grad = loss_grad(a)
    step = 1.0
    it = 0
    while it < max_iter and np.linalg.norm(grad) >= tol:
        gg = float(grad @ grad)
        while True:
            cand = a - step * grad
            c_loss, c_grad = loss_grad(cand)
            if c_loss <= loss - 0.5 * step * gg or step < 1e-12:
                break
            step *= 0.5
        a, loss, grad = cand, c_loss, c_grad
        step = min(step * 2.0, 1e6)
        it += 1
    params = {inst.alternatives[i]: float(a[i]) for i in range(n)}
    calibrated = logit_dataset(inst, [float(v) for v in a], grid)
    gnorm = float(np.linalg.norm(grad))
    return LogitFit(params, loss, gnorm, it, gnorm < tol, calibrated)

import math
from dataclasses import dataclass, field

import numpy as np
import pytest

from levystab.dynamics import (
    NOISE_BLOCK,
    ChainConfig,
    ReplicaDivergence,
    default_burn_in,
    run_coupled,
    run_single,
    step,
)
from levystab.experiments import ou_model
from levystab.losses import ConstantBundle, Dataset, DissipativeNonconvex, LossModel, QuadraticLoss1D, perturb_for_sweep
from levystab.stable import RngStream, StableNoiseSpec, sample_increment, tail_index_estimate
from levystab.wasserstein import w1_assignment


@dataclass(eq=False)
class LinearDrift(LossModel):
    """f(θ, x) = (c/2)|θ|²; c = 0 gives pure noise, c < 0 is explosive."""

    c: float = 0.0
    d: int = 2
    kind: str = field(default="linear-test", init=False)

    def __post_init__(self):
        self.theta_dim = self.data_dim = self.d
        self.constants = ConstantBundle(K1=1, K2=0, B=0, m=1, K=0, L=1, M=0)

    def loss(self, theta, x):
        return 0.5 * self.c * np.sum(np.asarray(theta) ** 2, axis=-1)

    def grad(self, theta, x):
        return self.c * np.asarray(theta, dtype=float)

    def data_stats(self, points):
        return np.zeros(1)

    def drift(self, thetas, stats):
        return self.c * thetas


def test_config_validation():
    for kw in ({"eta": 0.0, "steps": 1}, {"eta": 1.0, "steps": 1}, {"eta": 0.1, "steps": 0},
               {"eta": 0.1, "steps": 5, "burn_in": 5}, {"eta": 0.1, "steps": 5, "replicas": 0},
               {"eta": 0.1, "steps": 5, "thin": -1}):
        with pytest.raises(ValueError):
            ChainConfig(**kw)
    cfg = ChainConfig(eta=0.1, steps=5, theta0=[1.0, 2.0])
    assert np.array_equal(cfg.start(2), [1.0, 2.0])
    with pytest.raises(ValueError):
        cfg.start(3)
    assert default_burn_in(0.5, 0.01) == 2000


def test_pure_noise_step():
    model = LinearDrift(c=0.0, d=3)
    data = Dataset(np.zeros((1, 3)), 0.0)
    theta = np.array([1.0, -2.0, 0.5])
    spec = StableNoiseSpec(2.0)
    out = step(model, data, theta, spec, 1.0, RngStream(4))
    assert np.allclose(out - theta, sample_increment(spec, 3, 1.0, RngStream(4)), rtol=0, atol=1e-15)
    draws = np.array([step(model, data, theta, spec, 1.0, RngStream(4, i)) for i in range(20_000)]) - theta
    assert np.allclose(np.cov(draws.T), 2.0 * np.eye(3), atol=0.1)


def test_quadratic_step_algebra():
    model = QuadraticLoss1D()
    data = model.make_dataset(9, 1)
    spec = StableNoiseSpec(1.5)
    eta = 0.05
    theta = np.array([0.8])
    s = sample_increment(spec, 1, eta, RngStream(2))
    xbar2 = np.mean(data.points[:, 0] ** 2)
    expected = theta - eta * 2 * xbar2 * theta + s
    assert np.allclose(step(model, data, theta, spec, eta, RngStream(2)), expected, rtol=1e-15, atol=0)
    with pytest.raises(ValueError):
        step(model, data, np.zeros(2), spec, eta, RngStream(2))


def test_equal_data_zero_distance():
    model = DissipativeNonconvex(d=3)
    data = model.make_dataset(20, 3)
    res = run_coupled(model, data, data, StableNoiseSpec(1.3), ChainConfig(eta=0.05, steps=300, replicas=16))
    assert np.all(res.coupled_distances == 0.0)
    assert res.mean_distance == 0.0


def test_matches_hand_iterated_recursion():
    model = QuadraticLoss1D()
    data_a = model.make_dataset(5, 5)
    data_b = perturb_for_sweep(model, data_a, 0.4)
    spec = StableNoiseSpec(1.7)
    eta, steps, R, seed = 0.02, NOISE_BLOCK + 137, 3, 11
    res = run_coupled(model, data_a, data_b, spec, ChainConfig(eta=eta, steps=steps, replicas=R, seed=seed,
                                                               theta0=[0.3]))
    sa = np.mean(data_a.points[:, 0] ** 2)
    sb = np.mean(data_b.points[:, 0] ** 2)
    for r in range(R):
        gen = RngStream(seed, r).generator()
        noise = []
        while len(noise) < steps:
            noise.extend(sample_increment(spec, 1, eta, gen, size=NOISE_BLOCK)[:, 0])
        t = th = 0.3
        for k in range(steps):
            t = t - eta * 2 * sa * t + noise[k]
            th = th - eta * 2 * sb * th + noise[k]
        assert res.theta_samples[r, 0] == pytest.approx(t, rel=1e-12, abs=1e-14)
        assert res.theta_hat_samples[r, 0] == pytest.approx(th, rel=1e-12, abs=1e-14)


def test_geometric_contraction_alpha2():
    # identical data, different starts: distance is exactly (1 - 2ηs)^k |w - w'|
    model = QuadraticLoss1D()
    data = model.make_dataset(10, 6)
    s = np.mean(data.points[:, 0] ** 2)
    eta = 0.01
    res = run_coupled(model, data, data, StableNoiseSpec(2.0),
                      ChainConfig(eta=eta, steps=400, replicas=4, theta0=[1.0]), theta0_hat=[-1.0], track=True)
    k = np.arange(1, 401)
    assert np.allclose(res.time_series, 2.0 * (1 - 2 * eta * s) ** k, rtol=1e-9)


def test_shift_equivariance_pure_noise():
    model = LinearDrift(c=0.0, d=2)
    data = Dataset(np.zeros((1, 2)), 0.0)
    w, w2 = np.array([1.0, 2.0]), np.array([-0.5, 4.0])
    res = run_coupled(model, data, data, StableNoiseSpec(1.4),
                      ChainConfig(eta=0.1, steps=700, replicas=8, theta0=w), theta0_hat=w2)
    assert np.allclose(res.theta_samples - res.theta_hat_samples, w - w2, atol=1e-9)


@pytest.mark.parametrize("model", [QuadraticLoss1D(), DissipativeNonconvex(d=2)], ids=["quad", "diss"])
def test_contraction_from_different_starts(model):
    data = model.make_dataset(16, 7)
    d = model.theta_dim
    eta = 0.01
    steps = default_burn_in(model.constants.m, eta)
    w = np.full(d, 2.0)
    y = np.full(d, -3.0)
    res = run_coupled(model, data, data, StableNoiseSpec(1.5),
                      ChainConfig(eta=eta, steps=steps, replicas=64, theta0=w), theta0_hat=y)
    assert res.mean_distance < 1e-3 * np.linalg.norm(w - y)


def test_replicas_are_independent_of_batch_size():
    model = DissipativeNonconvex(d=2)
    data = model.make_dataset(8, 8)
    spec = StableNoiseSpec(1.6)
    small = run_single(model, data, spec, ChainConfig(eta=0.05, steps=600, replicas=2, seed=3))
    big = run_single(model, data, spec, ChainConfig(eta=0.05, steps=600, replicas=5, seed=3))
    assert np.array_equal(small, big[:2])
    again = run_single(model, data, spec, ChainConfig(eta=0.05, steps=600, replicas=5, seed=3))
    assert np.array_equal(big, again)


def test_ar1_variance_alpha2():
    a, eta = 1.0, 0.1
    model, data = ou_model(a)
    x = run_single(model, data, StableNoiseSpec(2.0),
                   ChainConfig(eta=eta, steps=200 + 100 * 20, burn_in=200, replicas=1000, thin=20))
    assert x.shape == (100_000, 1)
    exact = 2 * eta / (1 - (1 - a * eta) ** 2)
    assert np.var(x) == pytest.approx(exact, rel=0.03)


def test_ou_tail_index():
    model, data = ou_model(1.0)
    x = run_single(model, data, StableNoiseSpec(1.5),
                   ChainConfig(eta=0.05, steps=400 + 100 * 20, burn_in=400, replicas=1000, thin=20))
    assert tail_index_estimate(x[:, 0], 1000) == pytest.approx(1.5, abs=0.2)


@pytest.mark.parametrize("alpha", [1.5, 1.8])
def test_dissipative_envelope(alpha):
    model = DissipativeNonconvex(d=2)
    data = model.make_dataset(32, 9)
    x = run_single(model, data, StableNoiseSpec(alpha),
                   ChainConfig(eta=0.01, steps=10_000, burn_in=0, replicas=4, thin=1))
    r = model.constants.envelope_radius()
    assert np.mean(np.linalg.norm(x, axis=1) > r) < 0.01


def test_run_single_thin_requires_harvest():
    model, data = ou_model(1.0)
    with pytest.raises(ValueError):
        run_single(model, data, StableNoiseSpec(1.5), ChainConfig(eta=0.1, steps=10, burn_in=5, thin=10))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reported():
    model = LinearDrift(c=-50.0, d=1)
    data = Dataset(np.zeros((1, 1)), 0.0)
    cfg = ChainConfig(eta=0.9, steps=2000, replicas=3, theta0=[1.0])
    with pytest.raises(ReplicaDivergence) as err:
        run_single(model, data, StableNoiseSpec(1.5), cfg)
    assert err.value.replica in range(3)
    with pytest.raises(ReplicaDivergence):
        run_coupled(model, data, data, StableNoiseSpec(1.5), cfg)


def test_coupling_bounds_w1():
    model = QuadraticLoss1D()
    data = model.make_dataset(20, 10)
    res = run_coupled(model, data, perturb_for_sweep(model, data, 0.5), StableNoiseSpec(1.5),
                      ChainConfig(eta=0.01, steps=4000, burn_in=2000, replicas=256))
    w1 = w1_assignment(res.theta_samples, res.theta_hat_samples)
    assert w1 <= res.mean_distance + 1e-12
    assert res.stderr_distance > 0


def test_coupled_rejects_misaligned():
    model = QuadraticLoss1D()
    with pytest.raises(ValueError):
        run_coupled(model, model.make_dataset(4, 0), model.make_dataset(5, 0), StableNoiseSpec(1.5),
                    ChainConfig(eta=0.01, steps=10))

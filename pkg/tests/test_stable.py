import math

import numpy as np
import pytest
from scipy import stats

from levystab.stable import (
    RngStream,
    StableNoiseSpec,
    empirical_cf,
    sample_increment,
    sample_isotropic,
    sample_positive_stable,
    sample_sas,
    sample_sas_scalar,
    tail_index_estimate,
)

ALPHAS = [1.2, 1.5, 1.8, 2.0]


def test_spec_validation():
    for bad in (1.0, 0.5, 2.1, float("nan")):
        with pytest.raises(ValueError):
            StableNoiseSpec(bad)
    with pytest.raises(ValueError):
        StableNoiseSpec(1.5, scale=0.0)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("scale", [1.0, 0.7])
def test_scalar_ecf(alpha, scale):
    x = sample_sas(StableNoiseSpec(alpha, scale), RngStream(1, 0), 100_000)
    for u in (0.5, 1.0, 2.0):
        assert abs(empirical_cf(x, u) - math.exp(-((scale * u) ** alpha))) < 0.02


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("d", [1, 3, 5])
def test_isotropic_ecf(alpha, d):
    x = sample_isotropic(StableNoiseSpec(alpha), d, RngStream(2, d), 100_000)
    rng = np.random.default_rng(9)
    for r in (0.5, 1.0, 2.0):
        u = rng.standard_normal(d)
        u *= r / np.linalg.norm(u)
        assert abs(empirical_cf(x, u) - math.exp(-(r**alpha))) < 0.02


def test_alpha2_is_gaussian_variance_two():
    x = sample_sas(StableNoiseSpec(2.0), RngStream(3), 200_000)
    assert np.var(x) == pytest.approx(2.0, rel=0.02)
    assert stats.kstest(x, "norm", args=(0.0, math.sqrt(2.0))).pvalue > 1e-3
    v = sample_isotropic(StableNoiseSpec(2.0), 3, RngStream(3, 1), 200_000)
    assert np.allclose(np.cov(v.T), 2.0 * np.eye(3), atol=0.05)


def test_scalar_matches_scipy_levy_stable_quantiles():
    # scipy's S1 parametrisation with beta=0 coincides with exp(-|u|^alpha)
    x = sample_sas(StableNoiseSpec(1.5), RngStream(4), 50_000)
    qs = [0.1, 0.25, 0.5, 0.75, 0.9]
    ref = stats.levy_stable.ppf(qs, 1.5, 0.0)
    assert np.allclose(np.quantile(x, qs), ref, atol=0.05)


def test_positive_stable_laplace_transform():
    for index in (0.6, 0.75, 0.9):
        a = sample_positive_stable(index, RngStream(5), 200_000)
        assert np.all(a > 0)
        for s in (0.5, 1.0, 2.0):
            assert np.mean(np.exp(-s * a)) == pytest.approx(math.exp(-(s**index)), abs=0.01)
    assert np.all(sample_positive_stable(1.0, 0, 10) == 1.0)
    with pytest.raises(ValueError):
        sample_positive_stable(1.5, 0, 10)


def test_isotropic_rotation_invariance():
    spec = StableNoiseSpec(1.5)
    x = sample_isotropic(spec, 3, RngStream(6), 50_000)
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))
    y = sample_isotropic(spec, 3, RngStream(6, 1), 50_000) @ q.T
    for axis in range(3):
        assert stats.ks_2samp(x[:, axis], y[:, axis]).pvalue > 1e-3
    # marginal of an isotropic vector is the scalar law
    s = sample_sas(spec, RngStream(6, 2), 50_000)
    assert stats.ks_2samp(x[:, 0], s).pvalue > 1e-3


def test_increment_scaling():
    spec = StableNoiseSpec(1.5)
    a = sample_increment(spec, 2, 0.01, RngStream(7), 10)
    b = sample_isotropic(spec, 2, RngStream(7), 10)
    assert np.allclose(a, 0.01 ** (1 / 1.5) * b)
    single = sample_increment(spec, 2, 0.01, RngStream(7))
    assert single.shape == (2,)
    with pytest.raises(ValueError):
        sample_increment(spec, 2, 0.0, RngStream(7))


def test_streams_are_reproducible_and_distinct():
    spec = StableNoiseSpec(1.3)
    a = sample_sas(spec, RngStream(11, 4), 100)
    b = sample_sas(spec, RngStream(11, 4), 100)
    c = sample_sas(spec, RngStream(11, 5), 100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert isinstance(sample_sas_scalar(spec, RngStream(0)), float)
    with pytest.raises(TypeError):
        sample_sas(spec, "seed", 3)


def test_hill_on_pareto():
    rng = np.random.default_rng(12)
    x = rng.pareto(1.5, 100_000) + 1.0
    assert tail_index_estimate(x, 2000) == pytest.approx(1.5, abs=0.1)


@pytest.mark.parametrize("alpha", [1.3, 1.5, 1.8])
def test_hill_on_stable(alpha):
    x = sample_sas(StableNoiseSpec(alpha), RngStream(13), 100_000)
    assert tail_index_estimate(x, 1000) == pytest.approx(alpha, abs=0.2)


def test_hill_edge_cases():
    assert tail_index_estimate(np.ones(10), 3) == math.inf
    with pytest.raises(ValueError):
        tail_index_estimate(np.ones(10), 10)
    with pytest.raises(ValueError):
        tail_index_estimate(np.zeros(10), 3)


def test_heavy_tail_moments():
    # E|X|^p is finite for p < alpha: compare with the closed form for SαS
    alpha, p = 1.5, 0.5
    x = sample_sas(StableNoiseSpec(alpha), RngStream(14), 400_000)
    exact = 2**p * math.gamma((1 + p) / 2) * math.gamma(1 - p / alpha) / (math.gamma(1 - p / 2) * math.sqrt(math.pi))
    assert np.mean(np.abs(x) ** p) == pytest.approx(exact, rel=0.02)

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levystab import specfun

mpmath.mp.dps = 40

GRID = np.round(np.concatenate([np.linspace(0.1, 5.0, 50), np.linspace(5.0, 50.0, 46)]), 12)


@pytest.mark.parametrize("x", GRID)
def test_gamma_matches_mpmath(x):
    ref = float(mpmath.gamma(mpmath.mpf(float(x))))
    assert specfun.gamma(x) == pytest.approx(ref, rel=1e-10, abs=0)


@pytest.mark.parametrize("x", GRID)
def test_digamma_matches_mpmath(x):
    ref = float(mpmath.digamma(mpmath.mpf(float(x))))
    assert abs(specfun.digamma(x) - ref) <= 1e-10 * max(abs(ref), 1e-300) or abs(specfun.digamma(x) - ref) < 1e-14


@pytest.mark.parametrize("x", [0.1, 1.0, 7.3, 50.0, 170.5, 1e4, -0.5, -2.5, -7.25])
def test_log_abs_gamma_matches_mpmath(x):
    ref = float(mpmath.log(abs(mpmath.gamma(mpmath.mpf(x)))))
    assert specfun.log_abs_gamma(x) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_negative_arguments():
    assert specfun.gamma(-0.75) == pytest.approx(-4.8341465442958777, rel=1e-12)
    assert specfun.gamma(-1.5) == pytest.approx(4.0 * math.sqrt(math.pi) / 3.0, rel=1e-12)


def test_factorial_values():
    for k in range(1, 20):
        assert specfun.gamma(k + 1.0) == pytest.approx(math.factorial(k), rel=1e-13)
    assert specfun.log_abs_gamma(101.0) == pytest.approx(363.73937555556349, rel=1e-13)
    assert specfun.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_gamma_overflow_returns_inf():
    assert specfun.gamma(200.0) == math.inf


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -10.0])
def test_poles_raise(x):
    with pytest.raises(specfun.PoleError):
        specfun.gamma(x)
    with pytest.raises(specfun.PoleError):
        specfun.log_abs_gamma(x)


def test_digamma_known_values():
    euler = 0.57721566490153286
    assert specfun.digamma(1.0) == pytest.approx(-euler, rel=1e-13)
    assert specfun.digamma(0.5) == pytest.approx(-euler - 2.0 * math.log(2.0), rel=1e-13)
    with pytest.raises(ValueError):
        specfun.digamma(0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.05, max_value=40.0))
def test_gamma_recurrence(x):
    assert specfun.gamma(x + 1.0) == pytest.approx(x * specfun.gamma(x), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_gamma_reflection(x):
    assert specfun.gamma(x) * specfun.gamma(1.0 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.05, max_value=60.0))
def test_digamma_recurrence(x):
    lhs = specfun.digamma(x + 1.0)
    rhs = specfun.digamma(x) + 1.0 / x
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.05, max_value=150.0))
def test_exp_log_gamma(x):
    assert math.exp(specfun.log_abs_gamma(x)) == pytest.approx(abs(specfun.gamma(x)), rel=1e-11)


def test_digamma_is_log_gamma_derivative():
    for x in (0.7, 1.4616, 3.0, 12.5):
        h = 1e-5
        fd = (specfun.log_abs_gamma(x + h) - specfun.log_abs_gamma(x - h)) / (2 * h)
        assert specfun.digamma(x) == pytest.approx(fd, abs=1e-8)


def test_find_root_simple():
    r = specfun.find_root(lambda x: x * x - 2.0, 0.0, 2.0)
    assert r == pytest.approx(math.sqrt(2.0), abs=1e-12)
    x, lo, hi = specfun.find_root(math.cos, 1.0, 2.0, full_output=True)
    assert lo <= x <= hi
    assert hi - lo <= 1e-12
    assert x == pytest.approx(math.pi / 2, abs=1e-12)


def test_find_root_requires_bracket():
    with pytest.raises(specfun.BracketError):
        specfun.find_root(lambda x: x * x + 1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        specfun.find_root(math.cos, 1.0, 2.0, tol=0.0)


def test_digamma_root_against_mpmath():
    ref = float(mpmath.findroot(mpmath.digamma, 1.46))
    c0 = specfun.find_root(specfun.digamma, 1.0, 2.0, tol=1e-13)
    assert c0 == pytest.approx(ref, abs=1e-10)
    assert abs(specfun.digamma(c0)) < 1e-8

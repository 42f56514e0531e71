"""Scalar gamma, log-gamma and digamma on the real line, plus a bracketed root finder.

Gamma uses the Lanczos approximation (g = 7, nine terms) with reflection below 0.5.
Digamma shifts the argument upward by recurrence and finishes with the asymptotic
Bernoulli series. All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from typing import Callable

__all__ = [
    "PoleError",
    "BracketError",
    "gamma",
    "log_abs_gamma",
    "digamma",
    "find_root",
]

LANCZOS_G = 7.0
LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# B_{2k} / (2k) for k = 1..7
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_DIGAMMA_SHIFT = 10.0


class PoleError(ValueError):
    """Raised when gamma is evaluated at a non-positive integer."""


class BracketError(ValueError):
    """Raised when a root bracket does not straddle a sign change."""


def _check_pole(x: float) -> None:
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at x={x!r}")


def _lanczos_series(z: float) -> float:
    # z is the shifted argument x - 1, x >= 0.5
    a = LANCZOS_COEF[0]
    for i in range(1, len(LANCZOS_COEF)):
        a += LANCZOS_COEF[i] / (z + i)
    return a


def gamma(x: float) -> float:
    """Gamma function for real ``x`` away from the poles.

    Returns ``inf`` when the result overflows a double.
    """
    x = float(x)
    _check_pole(x)
    if x < 0.5:
        s = math.sin(math.pi * x)
        return math.pi / (s * gamma(1.0 - x))
    z = x - 1.0
    t = z + LANCZOS_G + 0.5
    a = _lanczos_series(z)
    try:
        # split the power so t**(z+0.5) does not overflow before exp(-t) damps it
        p = t ** ((z + 0.5) / 2.0)
        return _SQRT_2PI * p * (p * math.exp(-t)) * a
    except OverflowError:
        return math.inf


def log_abs_gamma(x: float) -> float:
    """log|Γ(x)|, finite for every non-pole real argument."""
    x = float(x)
    _check_pole(x)
    if x < 0.5:
        s = abs(math.sin(math.pi * x))
        return math.log(math.pi) - math.log(s) - log_abs_gamma(1.0 - x)
    z = x - 1.0
    t = z + LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_series(z))


def digamma(x: float) -> float:
    """ψ(x) = d/dx log Γ(x) for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"digamma is only provided for x > 0, got {x!r}")
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    term = inv2
    for c in _DIGAMMA_ASYMPTOTIC:
        series += c * term
        term *= inv2
    return acc + math.log(x) - 0.5 / x - series


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    *,
    polish: bool = True,
    full_output: bool = False,
):
    """Locate a sign change of ``f`` in ``[lo, hi]`` by bisection.

    Bisection runs until the bracket is no wider than ``tol``. With ``polish`` a
    final secant step inside the surviving bracket picks the returned point; it is
    clamped to the bracket, so the answer never leaves it.

    With ``full_output=True`` returns ``(root, lo, hi)`` where ``lo`` and ``hi`` are
    the final bracket endpoints.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    lo, hi = float(lo), float(hi)
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return (lo, lo, lo) if full_output else lo
    if fhi == 0.0:
        return (hi, hi, hi) if full_output else hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(f"f({lo})={flo:g} and f({hi})={fhi:g} have the same sign")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket already at floating-point resolution
        fmid = f(mid)
        if fmid == 0.0:
            return (mid, mid, mid) if full_output else mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid

    root = 0.5 * (lo + hi)
    if polish and fhi != flo:
        sec = lo - flo * (hi - lo) / (fhi - flo)
        root = min(max(sec, lo), hi)
    return (root, lo, hi) if full_output else root

"""Symmetric alpha-stable samplers and tail diagnostics.

Scalar draws use the Chambers-Mallows-Stuck transform. Rotationally symmetric
vectors are built as ``sqrt(A) * G`` with ``G ~ N(0, 2 sigma^2 I)`` and ``A`` a
positive (alpha/2)-stable variable whose Laplace transform is ``exp(-s^(alpha/2))``,
so that ``E exp(i<u, X>) = exp(-sigma^alpha |u|^alpha)`` in any dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StableNoiseSpec",
    "RngStream",
    "sample_sas",
    "sample_sas_scalar",
    "sample_positive_stable",
    "sample_isotropic",
    "sample_isotropic_vector",
    "sample_increment",
    "empirical_cf",
    "tail_index_estimate",
]


@dataclass(frozen=True)
class StableNoiseSpec:
    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"tail-index alpha must lie in (1, 2], got {self.alpha!r}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Streams with the same key replay the same sequence; different ``stream_id``
    values are spawned children of one seed sequence and are independent.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    raise TypeError(f"expected RngStream, numpy Generator or int seed, got {type(rng).__name__}")


def sample_sas(spec: StableNoiseSpec, rng, size=None) -> np.ndarray:
    """Draw ``size`` i.i.d. SαS(σ) variables (Chambers-Mallows-Stuck, β = 0)."""
    gen = _as_generator(rng)
    a = spec.alpha
    v = gen.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
    w = gen.standard_exponential(size)
    if a == 2.0:
        # CMS at alpha=2 collapses to 2 sin(V) sqrt(W), a N(0, 2) variable
        x = 2.0 * np.sin(v) * np.sqrt(w)
    else:
        x = np.sin(a * v) / np.cos(v) ** (1.0 / a) * (np.cos((1.0 - a) * v) / w) ** ((1.0 - a) / a)
    return spec.scale * x


def sample_sas_scalar(spec: StableNoiseSpec, rng) -> float:
    return float(sample_sas(spec, rng, 1)[0])


def sample_positive_stable(index: float, rng, size=None) -> np.ndarray:
    """Totally skewed positive stable draws with ``E exp(-s A) = exp(-s^index)``.

    Kanter's form of the skewed CMS transform; ``index`` in (0, 1].
    """
    if not 0.0 < index <= 1.0:
        raise ValueError("index must lie in (0, 1]")
    gen = _as_generator(rng)
    u = gen.uniform(0.0, math.pi, size)
    w = gen.standard_exponential(size)
    if index == 1.0:
        return np.ones_like(u)
    return (
        np.sin(index * u)
        / np.sin(u) ** (1.0 / index)
        * (np.sin((1.0 - index) * u) / w) ** ((1.0 - index) / index)
    )


def sample_isotropic(spec: StableNoiseSpec, d: int, rng, size: int) -> np.ndarray:
    """``size`` rotationally symmetric α-stable vectors, shape ``(size, d)``."""
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    gen = _as_generator(rng)
    a = sample_positive_stable(spec.alpha / 2.0, gen, size)
    g = gen.standard_normal((size, d)) * (math.sqrt(2.0) * spec.scale)
    return np.sqrt(a)[:, None] * g


def sample_isotropic_vector(spec: StableNoiseSpec, d: int, rng) -> np.ndarray:
    return sample_isotropic(spec, d, rng, 1)[0]


def sample_increment(spec: StableNoiseSpec, d: int, dt: float, rng, size: int | None = None) -> np.ndarray:
    """Lévy increment over a time step ``dt``: ``dt^(1/α)`` times an isotropic draw."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    factor = dt ** (1.0 / spec.alpha)
    if size is None:
        return factor * sample_isotropic_vector(spec, d, rng)
    return factor * sample_isotropic(spec, d, rng, size)


def empirical_cf(samples, u) -> float:
    """Real part of the empirical characteristic function at ``u``.

    ``samples`` of shape (N,) take a scalar ``u``; shape (N, d) takes a vector.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        return float(np.mean(np.cos(float(u) * x)))
    return float(np.mean(np.cos(x @ np.asarray(u, dtype=float))))


def tail_index_estimate(samples, k: int) -> float:
    """Hill estimate of the tail-index from the ``k`` largest absolute values.

    Returns ``inf`` when the top order statistics carry no spread (all log-spacings
    are zero).
    """
    x = np.abs(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("samples must be nonempty")
    if not 0 < k < x.size:
        raise ValueError(f"k must satisfy 0 < k < {x.size}, got {k}")
    top = np.sort(x)[::-1][: k + 1]
    if top[k] <= 0.0:
        raise ValueError("the (k+1)-th largest magnitude is zero; choose a smaller k")
    h = float(np.mean(np.log(top[:k] / top[k])))
    if h == 0.0:
        return math.inf
    return 1.0 / h

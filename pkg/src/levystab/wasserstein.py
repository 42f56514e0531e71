"""Empirical 1-Wasserstein estimators and p-th moment diagnostics.

Only W1 is offered. For heavy-tailed laws with tail-index alpha the population
W_p is infinite once p > alpha, so moment growth is reported instead of a finite
sample W_p that would mislead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .stable import _as_generator

__all__ = [
    "ASSIGNMENT_CAP",
    "EmpiricalMeasure",
    "AssignmentTooLarge",
    "w1_exact_1d",
    "w1_assignment",
    "w1_sliced",
    "empirical_p_moment",
]

ASSIGNMENT_CAP = 2048
DEFAULT_PROJECTIONS = 64


class AssignmentTooLarge(ValueError):
    """The exact assignment would exceed the sample-count cap."""


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """A uniform-weight cloud of ``N`` finite points in R^d, stored as (N, d)."""

    samples: np.ndarray

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] == 0:
            raise ValueError("an empirical measure needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def size(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def _measure(a) -> EmpiricalMeasure:
    return a if isinstance(a, EmpiricalMeasure) else EmpiricalMeasure(a)


def _mean(values) -> float:
    values = np.asarray(values, dtype=float).ravel()
    return math.fsum(values.tolist()) / values.size


def w1_exact_1d(a, b) -> float:
    """Exact W1 between two equal-size 1-d clouds: mean gap of the sorted samples."""
    a, b = _measure(a), _measure(b)
    if a.dim != 1 or b.dim != 1:
        raise ValueError("w1_exact_1d needs one-dimensional samples")
    if a.size != b.size:
        raise ValueError(f"sample counts differ: {a.size} vs {b.size}")
    return _mean(np.abs(np.sort(a.samples[:, 0]) - np.sort(b.samples[:, 0])))


def w1_assignment(a, b) -> float:
    """Exact W1 between equal-size clouds by optimal assignment (Euclidean cost)."""
    a, b = _measure(a), _measure(b)
    if a.dim != b.dim:
        raise ValueError(f"dimensions differ: {a.dim} vs {b.dim}")
    if a.size != b.size:
        raise ValueError(f"sample counts differ: {a.size} vs {b.size}")
    if a.size > ASSIGNMENT_CAP:
        raise AssignmentTooLarge(
            f"{a.size} samples exceed the assignment cap of {ASSIGNMENT_CAP}; use w1_sliced instead"
        )
    diff = a.samples[:, None, :] - b.samples[None, :, :]
    cost = np.sqrt(np.sum(diff**2, axis=-1))
    rows, cols = linear_sum_assignment(cost)
    return _mean(cost[rows, cols])


def w1_sliced(a, b, num_projections: int = DEFAULT_PROJECTIONS, rng=0) -> float:
    """Average over random unit directions of the exact 1-d W1 of the projections.

    A proxy for large clouds; it never exceeds the exact W1.
    """
    a, b = _measure(a), _measure(b)
    if a.dim != b.dim:
        raise ValueError(f"dimensions differ: {a.dim} vs {b.dim}")
    if a.size != b.size:
        raise ValueError(f"sample counts differ: {a.size} vs {b.size}")
    if num_projections < 1:
        raise ValueError("num_projections must be positive")
    if a.dim == 1:
        return w1_exact_1d(a, b)
    gen = _as_generator(rng)
    dirs = gen.standard_normal((num_projections, a.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pa = np.sort(a.samples @ dirs.T, axis=0)
    pb = np.sort(b.samples @ dirs.T, axis=0)
    per_dir = [_mean(np.abs(pa[:, j] - pb[:, j])) for j in range(num_projections)]
    return math.fsum(per_dir) / num_projections


def empirical_p_moment(a, p: float) -> float:
    """Mean of |x|^p over the cloud."""
    if not p > 0.0:
        raise ValueError("p must be positive")
    a = _measure(a)
    return _mean(np.linalg.norm(a.samples, axis=1) ** p)

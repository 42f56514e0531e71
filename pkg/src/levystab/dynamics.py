"""Euler-Maruyama simulation of full-gradient dynamics driven by α-stable noise.

The update is ``θ ← θ - η ∇F̂(θ, X) + η^{1/α} S`` with ``S`` a unit-scale
rotationally symmetric α-stable vector. Twin chains on two datasets share the
same noise draws (synchronous coupling), so their per-replica distance is a
feasible transport cost and bounds W1 from above.

Replicas are simulated as one vectorised batch, but every replica draws its noise
from its own stream ``RngStream(seed, replica)``. Noise is generated in blocks of
``NOISE_BLOCK`` steps per replica, so results depend only on the configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .losses import Dataset, LossModel
from .stable import RngStream, StableNoiseSpec, _as_generator, sample_increment

__all__ = [
    "NOISE_BLOCK",
    "ChainConfig",
    "CoupledTrajectoryResult",
    "ReplicaDivergence",
    "default_burn_in",
    "step",
    "run_coupled",
    "run_single",
]

NOISE_BLOCK = 512


class ReplicaDivergence(RuntimeError):
    def __init__(self, replica: int, step: int, chain: str = "theta"):
        super().__init__(f"replica {replica} produced a non-finite iterate in chain {chain!r} by step {step}")
        self.replica = replica
        self.step = step
        self.chain = chain


def default_burn_in(m: float, eta: float) -> int:
    """About twenty Lyapunov time-constants: ceil(10 / (m η))."""
    return int(math.ceil(10.0 / (m * eta)))


@dataclass(frozen=True)
class ChainConfig:
    """Step-size, horizon and replication of a simulation.

    ``thin = 0`` keeps only the terminal iterate of each replica. ``thin = k > 0``
    additionally harvests every k-th iterate after ``burn_in`` (used by
    :func:`run_single`). ``theta0`` defaults to the origin.
    """

    eta: float
    steps: int
    burn_in: int = 0
    replicas: int = 1
    seed: int = 0
    theta0: tuple | None = None
    thin: int = 0

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta!r}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError(f"burn_in must satisfy 0 <= burn_in < steps, got {self.burn_in} vs {self.steps}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.thin < 0:
            raise ValueError("thin must be >= 0")
        if self.theta0 is not None:
            object.__setattr__(self, "theta0", tuple(float(v) for v in np.atleast_1d(self.theta0)))

    def start(self, d: int) -> np.ndarray:
        if self.theta0 is None:
            return np.zeros(d)
        w = np.asarray(self.theta0, dtype=float)
        if w.shape != (d,):
            raise ValueError(f"theta0 has dimension {w.size}, model needs {d}")
        return w


@dataclass
class CoupledTrajectoryResult:
    theta_samples: np.ndarray
    theta_hat_samples: np.ndarray
    coupled_distances: np.ndarray
    time_series: np.ndarray | None = field(default=None)

    @property
    def mean_distance(self) -> float:
        return math.fsum(self.coupled_distances.tolist()) / self.coupled_distances.size

    @property
    def stderr_distance(self) -> float:
        r = self.coupled_distances.size
        if r < 2:
            return 0.0
        return float(np.std(self.coupled_distances, ddof=1) / math.sqrt(r))


class _NoiseSource:
    """Per-replica increment streams, consumed in fixed-size blocks."""

    def __init__(self, noise: StableNoiseSpec, d: int, eta: float, seed: int, replicas: int):
        self.noise = noise
        self.d = d
        self.eta = eta
        self.gens = [RngStream(seed, r).generator() for r in range(replicas)]

    def block(self, length: int) -> np.ndarray:
        # shape (length, R, d)
        draws = [sample_increment(self.noise, self.d, self.eta, g, size=NOISE_BLOCK)[:length] for g in self.gens]
        return np.stack(draws, axis=1)


def _check_finite(theta: np.ndarray, step_index: int, chain: str) -> None:
    bad = ~np.all(np.isfinite(theta), axis=1)
    if bad.any():
        raise ReplicaDivergence(int(np.argmax(bad)), step_index, chain)


def step(model: LossModel, data: Dataset, theta, noise: StableNoiseSpec, eta: float, rng) -> np.ndarray:
    """One Euler-Maruyama update from ``theta`` with a fresh noise draw."""
    if not 0.0 < eta:
        raise ValueError("eta must be positive")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.theta_dim,):
        raise ValueError(f"theta must have shape ({model.theta_dim},)")
    stats = model.data_stats(data.points)
    s = sample_increment(noise, model.theta_dim, eta, _as_generator(rng))
    out = theta - eta * model.drift(theta[None, :], stats)[0] + s
    if not np.all(np.isfinite(out)):
        raise ReplicaDivergence(0, 1)
    return out


def run_coupled(
    model: LossModel,
    data_a: Dataset,
    data_b: Dataset,
    noise: StableNoiseSpec,
    config: ChainConfig,
    *,
    theta0_hat=None,
    track: bool = False,
) -> CoupledTrajectoryResult:
    """Run both chains per replica on the same noise path and return terminal iterates.

    Both chains start from ``config.theta0``. ``theta0_hat`` overrides the start of
    the second chain; it exists for contraction diagnostics on a single dataset.
    With ``track=True`` the per-step mean coupled distance is recorded.
    """
    if data_a.points.shape != data_b.points.shape:
        raise ValueError("coupled datasets must be aligned (same n and dimension)")
    d = model.theta_dim
    R = config.replicas
    eta = config.eta
    stats_a = model.data_stats(data_a.points)
    stats_b = model.data_stats(data_b.points)
    theta = np.tile(config.start(d), (R, 1))
    w_hat = config.start(d) if theta0_hat is None else np.asarray(theta0_hat, dtype=float).reshape(d)
    theta_hat = np.tile(w_hat, (R, 1))
    source = _NoiseSource(noise, d, eta, config.seed, R)
    series = np.empty(config.steps) if track else None

    block = None
    for k in range(config.steps):
        j = k % NOISE_BLOCK
        if j == 0:
            _check_finite(theta, k, "theta")
            _check_finite(theta_hat, k, "theta_hat")
            block = source.block(min(NOISE_BLOCK, config.steps - k))
        s = block[j]
        theta = theta - eta * model.drift(theta, stats_a) + s
        theta_hat = theta_hat - eta * model.drift(theta_hat, stats_b) + s
        if track:
            series[k] = np.mean(np.linalg.norm(theta - theta_hat, axis=1))
    _check_finite(theta, config.steps, "theta")
    _check_finite(theta_hat, config.steps, "theta_hat")

    dist = np.linalg.norm(theta - theta_hat, axis=1)
    return CoupledTrajectoryResult(theta, theta_hat, dist, series)


def run_single(model: LossModel, data: Dataset, noise: StableNoiseSpec, config: ChainConfig) -> np.ndarray:
    """Approximate draws from the chain's invariant law.

    Returns the terminal iterate of each replica, shape (R, d), when
    ``config.thin == 0``. Otherwise returns every ``thin``-th iterate after
    ``burn_in`` for all replicas, ordered harvest-time-major, shape (H * R, d).
    """
    d = model.theta_dim
    R = config.replicas
    eta = config.eta
    stats = model.data_stats(data.points)
    theta = np.tile(config.start(d), (R, 1))
    source = _NoiseSource(noise, d, eta, config.seed, R)
    harvested = []

    block = None
    for k in range(config.steps):
        j = k % NOISE_BLOCK
        if j == 0:
            _check_finite(theta, k, "theta")
            block = source.block(min(NOISE_BLOCK, config.steps - k))
        theta = theta - eta * model.drift(theta, stats) + block[j]
        done = k + 1
        if config.thin and done > config.burn_in and (done - config.burn_in) % config.thin == 0:
            harvested.append(theta.copy())
    _check_finite(theta, config.steps, "theta")

    if not config.thin:
        return theta
    if not harvested:
        raise ValueError("no iterates harvested: steps - burn_in must be >= thin")
    out = np.concatenate(harvested, axis=0)
    if not np.all(np.isfinite(out)):
        bad = np.argmax(~np.all(np.isfinite(out), axis=1))
        raise ReplicaDivergence(int(bad % R), config.steps)
    return out

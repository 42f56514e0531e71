"""Loss models with certified regularity constants, datasets and data discrepancy.

Two models are catalogued:

``quadratic-1d``
    f(θ, x) = (θx)² with x in [x_min, x_max], x_min > 0.
``dissipative-nonconvex``
    f(θ, x) = (m0/2)|θ|² + a <x, sin θ> with x in the box [-x_max, x_max]^d.

Each model carries a :class:`ConstantBundle` derived in closed form. Dissipativity
uses the standard sign, <∇f(θ1,x) - ∇f(θ2,x), θ1 - θ2> >= m|θ1 - θ2|² - K.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from .stable import _as_generator

__all__ = [
    "ConstantBundle",
    "Dataset",
    "LossModel",
    "QuadraticLoss1D",
    "DissipativeNonconvex",
    "make_model",
    "grad_f",
    "grad_F_hat",
    "rho",
    "perturb_one",
    "perturb_for_sweep",
    "surrogate_loss",
    "surrogate_grad",
    "surrogate_lipschitz",
    "empirical_risk",
    "population_risk_estimate",
    "per_theta_risks",
]


@dataclass(frozen=True)
class ConstantBundle:
    K1: float
    K2: float
    B: float
    m: float
    K: float
    L: float
    M: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (value >= 0.0 and math.isfinite(value)):
                raise ValueError(f"constant {name} must be finite and nonnegative, got {value!r}")
        if not self.m > 0.0:
            raise ValueError("dissipativity constant m must be positive")

    def envelope_radius(self) -> float:
        """Radius 10 (1 + B/m) of the ball where constants are checked numerically."""
        return 10.0 * (1.0 + self.B / self.m)

    def max_step(self) -> float:
        """Upper limit min{1, m/L², 1/m} on the step-size for the discretization bound."""
        lim = min(1.0, 1.0 / self.m)
        if self.L > 0.0:
            lim = min(lim, self.m / self.L**2)
        return lim


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` data points (rows of ``points``) with a declared diameter bound ``D``."""

    points: np.ndarray
    domain_diameter: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("a dataset needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset points must be finite")
        diam = float(self.domain_diameter)
        if not diam >= 0.0:
            raise ValueError("domain_diameter must be nonnegative")
        spread = _max_pairwise_distance(pts)
        if spread > diam * (1.0 + 1e-12) + 1e-12:
            raise ValueError(f"points spread {spread:.6g} exceeds declared diameter {diam:.6g}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "domain_diameter", diam)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.domain_diameter == other.domain_diameter
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def __hash__(self):
        return hash((self.points.tobytes(), self.points.shape, self.domain_diameter))

    # -- serialization -------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{j}" for j in range(self.dim)])
        for row in self.points:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, domain_diameter: float) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and not _is_number(rows[0][0]):
            rows = rows[1:]
        return cls(np.array([[float(v) for v in r] for r in rows if r]), domain_diameter)

    def to_json(self) -> str:
        return json.dumps(
            {"domain_diameter": self.domain_diameter, "points": self.points.tolist()}, indent=2
        )

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        obj = json.loads(text)
        return cls(np.array(obj["points"], dtype=float), obj["domain_diameter"])

    def save(self, path) -> None:
        path = Path(path)
        if path.suffix == ".json":
            path.write_text(self.to_json(), encoding="utf-8")
        else:
            path.write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def load(cls, path, domain_diameter: float | None = None) -> "Dataset":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            return cls.from_json(text)
        if domain_diameter is None:
            raise ValueError("CSV datasets need an explicit domain_diameter")
        return cls.from_csv(text, domain_diameter)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _max_pairwise_distance(pts: np.ndarray) -> float:
    if pts.shape[0] < 2:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    sq = np.sum(pts**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T
    return float(math.sqrt(max(float(d2.max()), 0.0)))


class LossModel:
    """Base class for a loss ``f(θ, x)`` with gradient and certified constants.

    Subclasses provide the loss, its gradient in θ, the data domain, and the
    dataset statistic from which the full empirical gradient is computed. Every
    catalogue model is linear in a fixed feature map of ``x``, so ``∇F̂`` only
    needs the dataset mean of that feature.
    """

    kind: str = "abstract"
    theta_dim: int = 1
    data_dim: int = 1
    constants: ConstantBundle

    def loss(self, theta, x):
        raise NotImplementedError

    def grad(self, theta, x):
        raise NotImplementedError

    def data_stats(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def drift(self, thetas: np.ndarray, stats: np.ndarray) -> np.ndarray:
        """∇F̂ for a batch of iterates ``thetas`` of shape (R, d)."""
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def sample_points(self, n: int, rng) -> np.ndarray:
        raise NotImplementedError

    @property
    def domain_diameter(self) -> float:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def make_dataset(self, n: int, rng) -> Dataset:
        return Dataset(self.sample_points(n, rng), self.domain_diameter)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "theta_dim": self.theta_dim,
            "parameters": self.params(),
            "constants": asdict(self.constants),
        }


@dataclass(eq=False)
class QuadraticLoss1D(LossModel):
    x_min: float = 0.5
    x_max: float = 1.5
    kind: str = field(default="quadratic-1d", init=False)
    theta_dim: int = field(default=1, init=False)
    data_dim: int = field(default=1, init=False)

    def __post_init__(self):
        if not 0.0 < self.x_min <= self.x_max:
            raise ValueError("quadratic-1d needs 0 < x_min <= x_max (dissipativity fails at x_min = 0)")
        lo, hi = self.x_min, self.x_max
        self.constants = ConstantBundle(
            K1=2.0 * hi**2, K2=4.0 * hi, B=0.0, m=2.0 * lo**2, K=0.0, L=2.0 * hi**2, M=0.0
        )

    def loss(self, theta, x):
        theta = np.asarray(theta, dtype=float)
        x = np.asarray(x, dtype=float)
        return (theta[..., 0] * x[..., 0]) ** 2

    def grad(self, theta, x):
        theta = np.asarray(theta, dtype=float)
        x = np.asarray(x, dtype=float)
        return 2.0 * x**2 * theta

    def data_stats(self, points):
        return np.array([np.mean(points[:, 0] ** 2)])

    def drift(self, thetas, stats):
        return 2.0 * stats[0] * thetas

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return x.shape == (1,) and self.x_min <= x[0] <= self.x_max

    def sample_points(self, n, rng):
        return _as_generator(rng).uniform(self.x_min, self.x_max, (n, 1))

    @property
    def domain_diameter(self):
        return self.x_max - self.x_min

    def params(self):
        return {"x_min": self.x_min, "x_max": self.x_max}


@dataclass(eq=False)
class DissipativeNonconvex(LossModel):
    d: int = 2
    m0: float = 1.0
    a: float = 0.5
    x_max: float = 1.0
    kind: str = field(default="dissipative-nonconvex", init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not (self.m0 > 0.0 and self.a >= 0.0 and self.x_max > 0.0):
            raise ValueError("need m0 > 0, a >= 0, x_max > 0")
        if not self.a * self.x_max < self.m0:
            raise ValueError("dissipativity requires a * x_max < m0")
        self.theta_dim = self.data_dim = int(self.d)
        ax = self.a * self.x_max
        lip = self.m0 + ax
        self.constants = ConstantBundle(
            K1=lip, K2=self.a, B=ax * math.sqrt(self.d), m=self.m0 - ax, K=0.0, L=lip, M=ax
        )

    def loss(self, theta, x):
        theta = np.asarray(theta, dtype=float)
        x = np.asarray(x, dtype=float)
        return 0.5 * self.m0 * np.sum(theta**2, axis=-1) + self.a * np.sum(x * np.sin(theta), axis=-1)

    def grad(self, theta, x):
        theta = np.asarray(theta, dtype=float)
        x = np.asarray(x, dtype=float)
        return self.m0 * theta + self.a * x * np.cos(theta)

    def data_stats(self, points):
        return points.mean(axis=0)

    def drift(self, thetas, stats):
        return self.m0 * thetas + self.a * stats * np.cos(thetas)

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return x.shape == (self.d,) and bool(np.all(np.abs(x) <= self.x_max))

    def sample_points(self, n, rng):
        return _as_generator(rng).uniform(-self.x_max, self.x_max, (n, self.d))

    @property
    def domain_diameter(self):
        return 2.0 * self.x_max * math.sqrt(self.d)

    def params(self):
        return {"d": self.d, "m0": self.m0, "a": self.a, "x_max": self.x_max}


def make_model(kind: str, **params) -> LossModel:
    if kind == "quadratic-1d":
        return QuadraticLoss1D(**params)
    if kind == "dissipative-nonconvex":
        return DissipativeNonconvex(**params)
    raise ValueError(f"unknown model kind {kind!r}")


def _check_theta(model: LossModel, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1:] != (model.theta_dim,):
        raise ValueError(f"theta must have trailing dimension {model.theta_dim}, got shape {theta.shape}")
    return theta


def grad_f(model: LossModel, theta, x) -> np.ndarray:
    theta = _check_theta(model, theta)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[-1:] != (model.data_dim,):
        raise ValueError(f"x must have trailing dimension {model.data_dim}, got shape {x.shape}")
    return model.grad(theta, x)


def grad_F_hat(model: LossModel, theta, data: Dataset) -> np.ndarray:
    """Gradient of the empirical risk (1/n) Σ f(θ, x_i)."""
    if data.n == 0:
        raise ValueError("empty dataset")
    if data.dim != model.data_dim:
        raise ValueError(f"dataset dimension {data.dim} does not match model ({model.data_dim})")
    theta = _check_theta(model, theta)
    batch = np.atleast_2d(theta)
    out = model.drift(batch, model.data_stats(data.points))
    return out.reshape(theta.shape)


def rho(data_a: Dataset, data_b: Dataset) -> float:
    """Mean per-index Euclidean distance between two aligned datasets."""
    if data_a.points.shape != data_b.points.shape:
        raise ValueError(f"datasets are not aligned: {data_a.points.shape} vs {data_b.points.shape}")
    diffs = np.linalg.norm(data_a.points - data_b.points, axis=1)
    return math.fsum(diffs.tolist()) / data_a.n


def perturb_one(
    data: Dataset,
    index: int | None,
    displacement,
    rng=None,
    domain: LossModel | None = None,
) -> Dataset:
    """Copy of ``data`` with point ``index`` moved by ``displacement``.

    ``index=None`` picks the index uniformly with ``rng``. When ``domain`` is given
    the moved point must stay inside the model's data domain; the diameter bound of
    the dataset is always enforced.
    """
    if index is None:
        if rng is None:
            raise ValueError("index=None needs an rng to choose the perturbed point")
        index = int(_as_generator(rng).integers(data.n))
    if not 0 <= index < data.n:
        raise IndexError(f"index {index} out of range for n={data.n}")
    disp = np.atleast_1d(np.asarray(displacement, dtype=float))
    if disp.shape != (data.dim,):
        raise ValueError(f"displacement must have shape ({data.dim},)")
    pts = data.points.copy()
    pts[index] = pts[index] + disp
    if domain is not None and not domain.contains(pts[index]):
        raise ValueError(f"perturbed point {pts[index].tolist()} leaves the data domain")
    try:
        return Dataset(pts, data.domain_diameter)
    except ValueError as exc:
        raise ValueError(f"perturbation leaves the declared domain: {exc}") from None


def perturb_for_sweep(model: LossModel, data: Dataset, norm: float, index: int = 0) -> Dataset:
    """Move point ``index`` by ``norm`` along the first axis, toward whichever side fits."""
    e = np.zeros(data.dim)
    e[0] = norm
    for disp in (e, -e):
        if model.contains(data.points[index] + disp):
            return perturb_one(data, index, disp, domain=model)
    raise ValueError(f"a displacement of norm {norm} does not fit in the data domain at index {index}")


# -- surrogate loss and risks ----------------------------------------------------


def surrogate_loss(model: LossModel, theta, x, cap: float = 1.0):
    """Bounded surrogate ``cap * tanh(f(θ, x) / cap)``."""
    if not cap > 0.0:
        raise ValueError("cap must be positive")
    return cap * np.tanh(model.loss(theta, x) / cap)


def surrogate_grad(model: LossModel, theta, x, cap: float = 1.0) -> np.ndarray:
    f = np.asarray(model.loss(theta, x))
    sech2 = 1.0 - np.tanh(f / cap) ** 2
    return np.asarray(sech2)[..., None] * model.grad(theta, x)


def surrogate_lipschitz(
    model: LossModel,
    cap: float = 1.0,
    radius: float | None = None,
    rng=0,
    n_probe: int = 20000,
    n_polish: int = 8,
) -> float:
    """Numerical sup of |∇_θ ℓ| over the box |θ_i| <= radius and the data domain.

    The box contains the test envelope ball, so the value bounds the Lipschitz
    constant there. Random probing is followed by bounded local maximisation of the
    best candidates.
    """
    if radius is None:
        radius = model.constants.envelope_radius()
    gen = _as_generator(rng)
    d = model.theta_dim
    thetas = gen.uniform(-radius, radius, (n_probe, d))
    xs = model.sample_points(n_probe, gen)
    norms = np.linalg.norm(surrogate_grad(model, thetas, xs, cap), axis=-1)
    best = float(norms.max())

    lo_x, hi_x = _domain_box(model)
    bounds = [(-radius, radius)] * d + list(zip(lo_x, hi_x))

    def neg(z):
        g = surrogate_grad(model, z[:d], z[d:], cap)
        return -float(np.linalg.norm(g))

    for i in np.argsort(norms)[::-1][:n_polish]:
        z0 = np.concatenate([thetas[i], xs[i]])
        res = optimize.minimize(neg, z0, method="L-BFGS-B", bounds=bounds)
        best = max(best, -float(res.fun))
    return best


def _domain_box(model: LossModel):
    if isinstance(model, QuadraticLoss1D):
        return [model.x_min], [model.x_max]
    if isinstance(model, DissipativeNonconvex):
        return [-model.x_max] * model.d, [model.x_max] * model.d
    raise TypeError(f"no domain box known for {type(model).__name__}")


def per_theta_risks(model: LossModel, thetas, points, cap: float = 1.0) -> np.ndarray:
    """Average surrogate loss over ``points`` for every row of ``thetas``."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if thetas.shape[0] == 0 or points.shape[0] == 0:
        raise ValueError("risk evaluation needs nonempty inputs")
    vals = surrogate_loss(model, thetas[:, None, :], points[None, :, :], cap)
    return vals.mean(axis=1)


def empirical_risk(model: LossModel, thetas, data: Dataset, cap: float = 1.0) -> float:
    """R̂ averaged over the supplied parameter samples."""
    return float(np.mean(per_theta_risks(model, thetas, data.points, cap)))


def population_risk_estimate(
    model: LossModel, thetas, cap: float = 1.0, rng=0, n_fresh: int = 1000
) -> float:
    """Monte-Carlo estimate of R using ``n_fresh`` uniform draws from the data domain."""
    if n_fresh < 1:
        raise ValueError("n_fresh must be positive")
    fresh = model.sample_points(n_fresh, _as_generator(rng))
    return float(np.mean(per_theta_risks(model, thetas, fresh, cap)))

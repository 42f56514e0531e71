"""Closed-form Wasserstein stability and generalization bounds for heavy-tailed dynamics.

Gamma ratios are evaluated in log space so the dimension ``d`` can be large.
Constants that the theory only asserts to exist (C1, lambda, C, Q) enter as inputs
and are tagged ``external-unspecified`` in every report.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .losses import ConstantBundle
from .specfun import digamma, find_root, gamma, log_abs_gamma

__all__ = [
    "DomainError",
    "BoundConstants",
    "g",
    "g_direct",
    "log_g",
    "fractional_laplacian_constant",
    "sphere_area",
    "C_d_alpha",
    "compute_C0",
    "lyapunov_params",
    "critical_alpha0",
    "d0",
    "y0",
    "alpha0_prime",
    "alpha0_prime_from_y0",
    "theorem_A1_bound",
    "stationary_bound",
    "generalization_bound",
    "discretization_term",
    "discrete_bound",
    "discrete_generalization_bound",
]

COMPUTED = "computed"
EXTERNAL = "external-unspecified"
INPUT = "model-derived"


class DomainError(ValueError):
    """A bound was evaluated outside its parameter domain."""


def _check_open_alpha(alpha: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie strictly inside (1, 2); got alpha={alpha!r} (the formula is singular at both endpoints)")


def _check_d(d: int) -> None:
    if int(d) != d or d < 1:
        raise DomainError(f"dimension d must be a positive integer, got d={d!r}")


def _log_gamma_ratio(alpha: float, d: int) -> float:
    # log of 2^alpha Γ((d+alpha)/2) / |Γ(-alpha/2)|
    return alpha * math.log(2.0) + log_abs_gamma(0.5 * (d + alpha)) - log_abs_gamma(-0.5 * alpha)


def log_g(alpha: float, d: int) -> float:
    _check_open_alpha(alpha)
    _check_d(d)
    tail = math.sqrt(d) / (2.0 - alpha) + 1.0 / (alpha - 1.0)
    return _log_gamma_ratio(alpha, d) + math.log(tail)


def g(alpha: float, d: int) -> float:
    """The tail-index profile g(α; d) that carries all α-dependence of C0.

    Returns ``inf`` if the value overflows a double (very large ``d``); use
    :func:`log_g` there.
    """
    lg = log_g(alpha, d)
    return math.exp(lg) if lg < 709.0 else math.inf


def g_direct(alpha: float, d: int) -> float:
    """g(α; d) evaluated term by term without logarithms (for moderate ``d``)."""
    _check_open_alpha(alpha)
    _check_d(d)
    c = 2.0**alpha * gamma(0.5 * (d + alpha)) / abs(gamma(-0.5 * alpha))
    return c * math.sqrt(d) / (2.0 - alpha) + c / (alpha - 1.0)


def fractional_laplacian_constant(alpha: float, d: int) -> float:
    """d_α = 2^α Γ((d+α)/2) π^{-d/2} / |Γ(-α/2)|."""
    _check_d(d)
    return math.exp(_log_gamma_ratio(alpha, d) - 0.5 * d * math.log(math.pi))


def sphere_area(d: int) -> float:
    """Surface area 2 π^{d/2} / Γ(d/2) of the unit sphere in R^d."""
    _check_d(d)
    return math.exp(math.log(2.0) + 0.5 * d * math.log(math.pi) - log_abs_gamma(0.5 * d))


def C_d_alpha(alpha: float, d: int) -> float:
    """C_{d,α} = d_α σ_{d-1} (√d/(2-α) + 1/(α-1)); the π^{d/2} factors cancel."""
    _check_open_alpha(alpha)
    _check_d(d)
    log_val = _log_gamma_ratio(alpha, d) + math.log(2.0) - log_abs_gamma(0.5 * d)
    return math.exp(log_val) * (math.sqrt(d) / (2.0 - alpha) + 1.0 / (alpha - 1.0))


def compute_C0(alpha: float, d: int, bundle: ConstantBundle) -> float:
    """Uniform moment constant C0 = 3 + 2(K+B)/m + (2/m) C_{d,α}."""
    return 3.0 + 2.0 * (bundle.K + bundle.B) / bundle.m + 2.0 * C_d_alpha(alpha, d) / bundle.m


def lyapunov_params(bundle: ConstantBundle, alpha: float, d: int) -> tuple[float, float]:
    """Drift pair (λ1, q1) = (m/2, m + K + B + C_{d,α}) for V(w) = (1+|w|²)^{1/2}."""
    lam1 = 0.5 * bundle.m
    q1 = bundle.m + bundle.K + bundle.B + C_d_alpha(alpha, d)
    return lam1, q1


def critical_alpha0(tol: float = 1e-13) -> tuple[float, float]:
    """(c0, α0): c0 is the minimiser of Γ on (1, 2), i.e. the digamma root; α0 = 2(c0 - 1)."""
    c0 = find_root(digamma, 1.0, 2.0, tol)
    return c0, 2.0 * (c0 - 1.0)


def d0(alpha0: float) -> float:
    """Dimension threshold max(2, 1/((log 2)² (α0 - 1)⁴))."""
    if alpha0 == 1.0:
        raise DomainError("d0 is singular at alpha0 = 1")
    return max(2.0, 1.0 / (math.log(2.0) ** 2 * (alpha0 - 1.0) ** 4))


def y0(d: int, alpha0: float, alpha_for_y0: float | None = None) -> float:
    """log 2 + ψ(d + α/2)/2 + (3 - α0)/(2 - α0), with α defaulting to α0."""
    _check_d(d)
    if not alpha0 < 2.0:
        raise DomainError(f"alpha0 must be < 2, got {alpha0!r}")
    a = alpha0 if alpha_for_y0 is None else alpha_for_y0
    if not 0.0 < a <= 2.0:
        raise DomainError(f"alpha inside y0 must lie in (0, 2], got {a!r}")
    return math.log(2.0) + 0.5 * digamma(d + 0.5 * a) + (3.0 - alpha0) / (2.0 - alpha0)


def alpha0_prime_from_y0(d: int, alpha0: float, y: float) -> float:
    if not y > 0.0:
        raise DomainError(f"y0 must be positive, got {y!r}")
    sd = math.sqrt(d)
    if math.isinf(y):
        return min(alpha0, 1.0)
    return min(alpha0, 1.0 + (-1.0 + math.sqrt(1.0 + 4.0 * sd / y)) / (2.0 * sd))


def alpha0_prime(d: int, alpha0: float, alpha_for_y0: float | None = None) -> float:
    """Upper end of the interval [1, α0'] on which g(·; d) is decreasing."""
    return alpha0_prime_from_y0(d, alpha0, y0(d, alpha0, alpha_for_y0))


@dataclass(frozen=True)
class BoundConstants:
    """Everything the bound formulas consume, with provenance of each entry.

    ``C0`` is computed from (α, d, bundle); ``C1``, ``lam``, ``C`` and ``Q`` are
    assumed. Build with :meth:`from_bundle` to get the documented defaults
    C1 = 1, λ = m/2, C = 1 + B/m, Q = 1.
    """

    C0: float
    C1: float
    lam: float
    C: float
    Q: float
    bundle: ConstantBundle
    lipschitz: float = 1.0
    diameter: float = 0.0
    alpha: float | None = None
    d: int | None = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("C0", "C1", "lam", "C", "Q", "lipschitz"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        if not self.diameter >= 0.0:
            raise DomainError("diameter must be nonnegative")

    @classmethod
    def from_bundle(
        cls,
        bundle: ConstantBundle,
        alpha: float,
        d: int,
        *,
        lipschitz: float = 1.0,
        diameter: float = 0.0,
        C1: float | None = None,
        lam: float | None = None,
        C: float | None = None,
        Q: float | None = None,
    ) -> "BoundConstants":
        prov = {
            "C0": COMPUTED,
            "C1": EXTERNAL,
            "lam": EXTERNAL,
            "C": EXTERNAL,
            "Q": EXTERNAL,
            "bundle": INPUT,
            "lipschitz": INPUT,
            "diameter": INPUT,
        }
        return cls(
            C0=compute_C0(alpha, d, bundle),
            C1=1.0 if C1 is None else C1,
            lam=0.5 * bundle.m if lam is None else lam,
            C=1.0 + bundle.B / bundle.m if C is None else C,
            Q=1.0 if Q is None else Q,
            bundle=bundle,
            lipschitz=lipschitz,
            diameter=diameter,
            alpha=alpha,
            d=d,
            provenance=prov,
        )

    @property
    def contraction_factor(self) -> float:
        """(C1 λ^{-1} e^λ + 1) e^L, the common prefactor of the long-time bounds."""
        return (self.C1 / self.lam * math.exp(self.lam) + 1.0) * math.exp(self.bundle.L)

    def report(self) -> dict:
        out = {
            "C0": self.C0,
            "C1": self.C1,
            "lambda": self.lam,
            "C": self.C,
            "Q": self.Q,
            "lipschitz_surrogate": self.lipschitz,
            "diameter_D": self.diameter,
            "bundle": asdict(self.bundle),
        }
        return out


def theorem_A1_bound(
    case: str,
    eta: float,
    N: int | None,
    w_norm: float,
    rho: float,
    constants: BoundConstants,
    alpha: float,
) -> float:
    """Finite-time W1 bound between the twin processes at time ηN.

    ``case`` is "I" (N = 1), "II" (2 <= N <= 1/η + 1) or "III" (N > 1/η + 1).
    Case III also accepts ``N=None`` for the N → ∞ regime, where ``eta=0`` is
    allowed and yields the stationary bound at the given ``w_norm``.
    """
    if not 1.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (1, 2], got {alpha!r}")
    if rho < 0.0 or w_norm < 0.0:
        raise DomainError("rho and w_norm must be nonnegative")
    limit = case == "III" and N is None
    if limit:
        if not 0.0 <= eta < 1.0:
            raise DomainError(f"eta must lie in [0, 1) for the limiting case, got {eta!r}")
    elif not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}")
    if not limit:
        if N is None or N < 1:
            raise DomainError("N must be a positive integer")
        if case == "I" and N != 1:
            raise DomainError(f"case I needs N = 1, got N={N}")
        if case == "II" and not 2 <= N <= 1.0 / eta + 1.0:
            raise DomainError(f"case II needs 2 <= N <= 1/eta + 1, got N={N}, eta={eta}")
        if case == "III" and not N > 1.0 / eta + 1.0:
            raise DomainError(f"case III needs N > 1/eta + 1, got N={N}, eta={eta}")
    if case not in ("I", "II", "III"):
        raise DomainError(f"unknown case {case!r}")

    k = constants.bundle
    lead = (k.K1 + rho * k.K2) * 2.0 * constants.C
    eta_hi = eta ** (1.0 + 1.0 / alpha)
    eta_lo = eta ** (1.0 / alpha)

    if case == "I":
        return lead * ((1.0 + w_norm) * eta_hi + rho * k.K2 * (2.0 * w_norm + 1.0) * eta)

    moment = 1.0 + constants.C0 * (1.0 + w_norm)
    data_term = rho * k.K2 * (2.0 * constants.C0 * (1.0 + w_norm) + 1.0)
    short = lead * moment * eta_hi + data_term * eta
    if case == "II":
        factor = math.exp(k.L)
    else:
        factor = constants.contraction_factor
    return short + factor * lead * moment * eta_lo + factor * data_term


def stationary_bound(rho: float, constants: BoundConstants) -> float:
    """W1 between the invariant laws of the twin continuous-time processes."""
    if rho < 0.0:
        raise DomainError("rho must be nonnegative")
    return constants.contraction_factor * rho * constants.bundle.K2 * (2.0 * constants.C0 + 1.0)


def generalization_bound(constants: BoundConstants, n: int) -> float:
    """𝓛 D (C1 λ^{-1} e^λ + 1) e^L K2 (2 C0 + 1) / n."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return (
        constants.lipschitz
        * constants.diameter
        * constants.contraction_factor
        * constants.bundle.K2
        * (2.0 * constants.C0 + 1.0)
        / n
    )


def discretization_term(eta: float, alpha: float, Q: float) -> float:
    """2 Q η^{2/α - 1}: twice the stationary discretization error."""
    if not 1.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (1, 2], got {alpha!r}")
    if alpha == 2.0:
        return 2.0 * Q
    return 2.0 * Q * eta ** (2.0 / alpha - 1.0)


def discrete_bound(eta: float, rho: float, constants: BoundConstants, alpha: float) -> float:
    """W1 between the invariant laws of the two Euler-Maruyama chains."""
    limit = constants.bundle.max_step()
    if not 0.0 < eta < limit:
        raise DomainError(f"eta={eta!r} must satisfy 0 < eta < min(1, m/L^2, 1/m) = {limit:.6g}")
    return discretization_term(eta, alpha, constants.Q) + stationary_bound(rho, constants)


def discrete_generalization_bound(eta: float, n: int, constants: BoundConstants, alpha: float) -> float:
    """𝓛 times the discrete bound at the worst-case discrepancy ρ = D/n."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return constants.lipschitz * discrete_bound(eta, constants.diameter / n, constants, alpha)

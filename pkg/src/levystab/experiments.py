"""Experiment drivers behind the command-line interface.

Each driver is a pure function of its arguments (seed included) and returns plain
Python data: lists of row dicts and summary dicts ready for CSV or JSON output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _reference, bounds, specfun
from .dynamics import ChainConfig, default_burn_in, run_coupled, run_single
from .losses import (
    Dataset,
    LossModel,
    QuadraticLoss1D,
    perturb_for_sweep,
    per_theta_risks,
    rho,
    surrogate_lipschitz,
)
from .stable import (
    RngStream,
    StableNoiseSpec,
    empirical_cf,
    sample_isotropic,
    sample_sas,
)
from .wasserstein import ASSIGNMENT_CAP, w1_assignment, w1_exact_1d, w1_sliced

# stream ids for auxiliary randomness, kept clear of replica ids 0..R-1
_DATA_STREAM = 1 << 40
_FRESH_STREAM = 1 << 41
_CHECK_STREAM = 1 << 42


# -- g-curves ----------------------------------------------------------------


def gcurve_rows(alphas, ds) -> list[dict]:
    """Rows (alpha, d, g, g_normalized, log_g); normalization divides by the per-d grid max."""
    alphas = [float(a) for a in alphas]
    if not alphas or not ds:
        raise ValueError("alpha grid and d list must be nonempty")
    for a in alphas:
        if not 1.005 <= a <= 1.995:
            raise bounds.DomainError(f"alpha grid value {a} is within 0.005 of a pole at 1 or 2")
    rows = []
    for d in ds:
        logs = [bounds.log_g(a, int(d)) for a in alphas]
        top = max(logs)
        for a, lg in zip(alphas, logs):
            rows.append(
                {
                    "alpha": a,
                    "d": int(d),
                    "g": math.exp(lg) if lg < 709.0 else math.inf,
                    "g_normalized": math.exp(lg - top),
                    "log_g": lg,
                }
            )
    return rows


def gcurve_shape(alphas, ds) -> list[dict]:
    """Per-d summary of the curve shape on the grid: argmin, endpoint ratios, slope at 1.02."""
    out = []
    alphas = [float(a) for a in alphas]
    for d in ds:
        logs = np.array([bounds.log_g(a, int(d)) for a in alphas])
        i = int(np.argmin(logs))
        h = 1e-5
        slope_log = (bounds.log_g(1.02 + h, int(d)) - bounds.log_g(1.02 - h, int(d))) / (2 * h)
        out.append(
            {
                "d": int(d),
                "alpha_min": alphas[i],
                "interior": 0 < i < len(alphas) - 1,
                "left_ratio": math.exp(logs[0] - logs[i]),
                "right_ratio": math.exp(logs[-1] - logs[i]),
                # sign of dg/dα equals the sign of d(log g)/dα
                "dlogg_dalpha_at_1_02": slope_log,
            }
        )
    return out


# -- OU helpers --------------------------------------------------------------


def ou_model(rate: float) -> tuple[LossModel, Dataset]:
    """Quadratic model whose full gradient is ``rate * θ`` (a single data point)."""
    c = math.sqrt(rate / 2.0)
    return QuadraticLoss1D(x_min=c, x_max=c), Dataset([[c]], 0.0)


def ou_stationary_samples(
    alpha: float,
    *,
    rate: float = 1.0,
    eta: float = 0.01,
    burn_in: int = 10_000,
    replicas: int = 1000,
    harvest: int = 100,
    thin: int = 100,
    seed: int = 0,
) -> np.ndarray:
    model, data = ou_model(rate)
    cfg = ChainConfig(
        eta=eta,
        steps=burn_in + harvest * thin,
        burn_in=burn_in,
        replicas=replicas,
        seed=seed,
        thin=thin,
    )
    return run_single(model, data, StableNoiseSpec(alpha), cfg)[:, 0]


def ecf_scale(samples, alpha: float, us=(0.5, 1.0, 2.0)) -> float:
    """Scale σ fitted from -log φ(u) = σ^α |u|^α, averaged over ``us``."""
    fits = [(-math.log(empirical_cf(samples, u))) ** (1.0 / alpha) / u for u in us]
    return math.fsum(fits) / len(fits)


# -- moment divergence -------------------------------------------------------


def moment_at(values: np.ndarray, n: int) -> float:
    """Typical empirical mean of ``values`` at sample size ``n``.

    The median over disjoint consecutive blocks of length ``n`` of the block means;
    with a single block this is the plain mean of the first ``n`` values.
    """
    blocks = values.size // n
    if blocks < 1:
        raise ValueError(f"need at least {n} samples, have {values.size}")
    means = values[: blocks * n].reshape(blocks, n).mean(axis=1)
    return float(np.median(means))


def moment_divergence(
    alpha: float,
    ps,
    Ns,
    *,
    seed: int = 0,
    rate: float = 1.0,
    eta: float = 0.05,
    replicas: int = 1000,
    thin: int = 20,
    burn_in: int | None = None,
) -> dict:
    """Empirical p-moments of OU-stationary samples as the sample size grows."""
    Ns = sorted(int(n) for n in Ns)
    ps = [float(p) for p in ps]
    if not Ns or not ps:
        raise ValueError("p list and N list must be nonempty")
    n_max = Ns[-1]
    harvest = -(-n_max // replicas)
    if burn_in is None:
        burn_in = default_burn_in(rate, eta)
    x = ou_stationary_samples(
        alpha, rate=rate, eta=eta, burn_in=burn_in, replicas=replicas, harvest=harvest, thin=thin, seed=seed
    )[:n_max]
    absx = np.abs(x)
    rows = []
    summary = []
    for p in ps:
        vals = absx**p
        est = [moment_at(vals, n) for n in Ns]
        for n, e in zip(Ns, est):
            rows.append({"p": p, "N": n, "moment": e})
        ratio = est[-1] / est[0]
        if p > alpha and ratio > 10.0:
            verdict = "divergent (consistent with infinite p-moment for p > alpha)"
        elif p < alpha and 0.5 <= ratio <= 2.0:
            verdict = "stable"
        elif p > alpha and alpha == 2.0 and 0.5 <= ratio <= 2.0:
            verdict = "stable"
        else:
            verdict = "inconclusive"
        summary.append({"p": p, "ratio": ratio, "N_min": Ns[0], "N_max": n_max, "verdict": verdict})
    return {"rows": rows, "summary": summary, "samples": int(x.size)}


# -- stability sweep ---------------------------------------------------------


@dataclass(frozen=True)
class SweepSettings:
    eta: float = 0.01
    steps: int | None = None
    burn_in: int | None = None
    replicas: int = 256
    delta: float = 0.5
    cap: float = 1.0
    n_fresh: int = 1000
    consistency_mode: bool = False


def stability_sweep(model: LossModel, ns, alphas, settings: SweepSettings, seed: int = 0) -> dict:
    """Coupled simulations on X and a one-point perturbation X̂, for every (n, α)."""
    bundle = model.constants
    eta = settings.eta
    burn_in = settings.burn_in if settings.burn_in is not None else default_burn_in(bundle.m, eta)
    steps = settings.steps if settings.steps is not None else 2 * burn_in
    lipschitz = surrogate_lipschitz(model, settings.cap, rng=RngStream(seed, _CHECK_STREAM))
    fresh = model.sample_points(settings.n_fresh, RngStream(seed, _FRESH_STREAM))

    rows = []
    for n, alpha in itertools.product([int(n) for n in ns], [float(a) for a in alphas]):
        data = model.make_dataset(n, RngStream(seed, _DATA_STREAM + n))
        data_hat = perturb_for_sweep(model, data, settings.delta) if settings.delta > 0 else data
        r = rho(data, data_hat)
        cfg = ChainConfig(eta=eta, steps=steps, burn_in=burn_in, replicas=settings.replicas, seed=seed)
        res = run_coupled(model, data, data_hat, StableNoiseSpec(alpha), cfg)

        if settings.replicas <= ASSIGNMENT_CAP:
            w1, w1_method = w1_assignment(res.theta_samples, res.theta_hat_samples), "assignment"
        else:
            w1 = w1_sliced(res.theta_samples, res.theta_hat_samples, rng=RngStream(seed, _CHECK_STREAM))
            w1_method = "sliced-proxy"

        risk_emp = per_theta_risks(model, res.theta_samples, data.points, settings.cap)
        risk_pop = per_theta_risks(model, res.theta_samples, fresh, settings.cap)
        gaps = risk_emp - risk_pop
        gap = float(np.mean(gaps))
        gap_se = float(np.std(gaps, ddof=1) / math.sqrt(gaps.size)) if gaps.size > 1 else 0.0

        row = {
            "n": n,
            "alpha": alpha,
            "rho": r,
            "mean_coupled_distance": res.mean_distance,
            "coupled_distance_stderr": res.stderr_distance,
            "w1_empirical": w1,
            "w1_method": w1_method,
            "generalization_gap": gap,
            "generalization_gap_stderr": gap_se,
            "stationary_bound": None,
            "discrete_bound": None,
            "generalization_bound": None,
            "discrete_generalization_bound": None,
            "consistent": None,
        }
        if 1.0 < alpha < 2.0:
            consts = bounds.BoundConstants.from_bundle(
                bundle, alpha, model.theta_dim, lipschitz=lipschitz, diameter=model.domain_diameter
            )
            row["stationary_bound"] = bounds.stationary_bound(r, consts)
            row["generalization_bound"] = bounds.generalization_bound(consts, n)
            if eta < bundle.max_step():
                row["discrete_bound"] = bounds.discrete_bound(eta, r, consts, alpha)
                row["discrete_generalization_bound"] = bounds.discrete_generalization_bound(
                    eta, n, consts, alpha
                )
                if settings.consistency_mode:
                    row["consistent"] = (
                        row["mean_coupled_distance"] <= row["discrete_bound"]
                        and row["w1_empirical"] <= row["discrete_bound"]
                        and abs(gap) <= row["discrete_generalization_bound"]
                    )
        rows.append(row)

    slopes = {}
    for alpha in [float(a) for a in alphas]:
        sel = [row for row in rows if row["alpha"] == alpha and row["mean_coupled_distance"] > 0]
        if len(sel) >= 2:
            x = np.log([row["n"] for row in sel])
            y = np.log([row["mean_coupled_distance"] for row in sel])
            slopes[repr(alpha)] = float(np.polyfit(x, y, 1)[0])

    return {
        "rows": rows,
        "loglog_slope_vs_n": slopes,
        "surrogate_lipschitz": lipschitz,
        "chain": {"eta": eta, "steps": steps, "burn_in": burn_in, "replicas": settings.replicas},
        "model": model.describe(),
    }


# -- bound report -------------------------------------------------------------


def bounds_report(
    model: LossModel,
    alpha: float,
    *,
    eta: float = 0.01,
    n: int = 100,
    rho_value: float | None = None,
    w_norm: float = 0.0,
    N: int | None = None,
    cap: float = 1.0,
    C1: float | None = None,
    lam: float | None = None,
    C: float | None = None,
    Q: float | None = None,
    seed: int = 0,
) -> dict:
    d = model.theta_dim
    lipschitz = surrogate_lipschitz(model, cap, rng=RngStream(seed, _CHECK_STREAM))
    consts = bounds.BoundConstants.from_bundle(
        model.constants, alpha, d, lipschitz=lipschitz, diameter=model.domain_diameter, C1=C1, lam=lam, C=C, Q=Q
    )
    r = model.domain_diameter / n if rho_value is None else rho_value
    c0, a0 = bounds.critical_alpha0()
    lam1, q1 = bounds.lyapunov_params(model.constants, alpha, d)
    if N is None:
        N = int(math.floor(1.0 / eta + 1.0)) + 1
    case = "I" if N == 1 else ("II" if N <= 1.0 / eta + 1.0 else "III")

    results = {
        "alpha": alpha,
        "d": d,
        "eta": eta,
        "n": n,
        "rho": r,
        "w_norm": w_norm,
        "N": N,
        "critical": {
            "c0": c0,
            "alpha0": a0,
            "d0": bounds.d0(a0),
            "alpha0_prime": bounds.alpha0_prime(d, a0),
            "alpha0_double_prime": "not computed (existence only)",
        },
        "g": bounds.g(alpha, d),
        "log_g": bounds.log_g(alpha, d),
        "d_alpha": bounds.fractional_laplacian_constant(alpha, d),
        "sphere_area": bounds.sphere_area(d),
        "C_d_alpha": bounds.C_d_alpha(alpha, d),
        "lambda1": lam1,
        "q1": q1,
        "constants": consts.report(),
        "stationary_bound": bounds.stationary_bound(r, consts),
        "generalization_bound": bounds.generalization_bound(consts, n),
        "theorem_A1": {"case": case, "value": bounds.theorem_A1_bound(case, eta, N, w_norm, r, consts, alpha)},
        "discretization_term": bounds.discretization_term(eta, alpha, consts.Q),
    }
    if eta < model.constants.max_step():
        results["discrete_bound"] = bounds.discrete_bound(eta, r, consts, alpha)
        results["discrete_generalization_bound"] = bounds.discrete_generalization_bound(eta, n, consts, alpha)
    else:
        results["discrete_bound"] = None
        results["discrete_bound_note"] = (
            f"eta={eta} violates eta < min(1, m/L^2, 1/m) = {model.constants.max_step():.6g}"
        )
    return {"results": results, "provenance": dict(consts.provenance)}


# -- validation suite ---------------------------------------------------------


def _check(name: str, passed: bool, measured, target: str) -> dict:
    return {"check": name, "passed": bool(passed), "measured": measured, "target": target}


def validate(seed: int = 0, draws: int = 100_000) -> list[dict]:
    """Run the built-in acceptance checks and return one record per check."""
    checks = []

    worst = max(abs(specfun.gamma(x) / v - 1.0) for x, v in _reference.GAMMA.items())
    checks.append(_check("gamma_vs_reference", worst <= 1e-10, worst, "max rel err <= 1e-10"))
    worst = max(abs(specfun.digamma(x) / v - 1.0) for x, v in _reference.DIGAMMA.items())
    checks.append(_check("digamma_vs_reference", worst <= 1e-10, worst, "max rel err <= 1e-10"))
    c0, a0 = bounds.critical_alpha0()
    checks.append(_check("digamma_root_c0", abs(c0 - 1.46163211) <= 1e-6, c0, "1.46163211 +- 1e-6"))
    checks.append(_check("alpha0", abs(a0 - 2 * (1.46163211 - 1)) <= 2e-6, a0, "0.92326422 +- 2e-6"))

    for i, alpha in enumerate((1.2, 1.5, 1.8, 2.0)):
        spec = StableNoiseSpec(alpha)
        xs = sample_sas(spec, RngStream(seed, _CHECK_STREAM + 1 + i), draws)
        xv = sample_isotropic(spec, 3, RngStream(seed, _CHECK_STREAM + 11 + i), draws)
        direction = np.ones(3) / math.sqrt(3.0)
        worst_s = max(abs(empirical_cf(xs, u) - math.exp(-(u**alpha))) for u in (0.5, 1.0, 2.0))
        worst_v = max(abs(empirical_cf(xv, u * direction) - math.exp(-(u**alpha))) for u in (0.5, 1.0, 2.0))
        checks.append(_check(f"ecf_scalar_alpha_{alpha}", worst_s <= 0.02, worst_s, "<= 0.02"))
        checks.append(_check(f"ecf_isotropic_d3_alpha_{alpha}", worst_v <= 0.02, worst_v, "<= 0.02"))

    x = ou_stationary_samples(1.5, rate=1.0, eta=0.01, burn_in=10_000, seed=seed)
    scale = ecf_scale(x, 1.5)
    target = 1.5 ** (-1.0 / 1.5)
    checks.append(
        _check("ou_stationary_scale", abs(scale / target - 1.0) <= 0.10, scale, f"{target:.6f} within 10%")
    )

    grid = np.round(np.arange(1.01, 1.99 + 1e-9, 0.01), 10)
    for s in gcurve_shape(grid, (1, 10, 100, 1000)):
        ok = s["interior"] and s["left_ratio"] > 2 and s["right_ratio"] > 2 and s["dlogg_dalpha_at_1_02"] < 0
        checks.append(_check(f"gcurve_nonmonotone_d{s['d']}", ok, s, "interior min, ends > 2x min, slope<0 at 1.02"))

    bundle = QuadraticLoss1D().constants
    consts = bounds.BoundConstants.from_bundle(bundle, 1.5, 1)
    lam1, q1 = bounds.lyapunov_params(bundle, 1.5, 1)
    err = abs(1.0 + q1 / lam1 - consts.C0) / consts.C0
    checks.append(_check("C0_equals_1_plus_q1_over_lambda1", err <= 1e-12, err, "rel err <= 1e-12"))
    a1 = bounds.theorem_A1_bound("III", 0.0, None, 0.0, 0.1, consts, 1.5)
    st = bounds.stationary_bound(0.1, consts)
    err = abs(a1 - st) / st
    checks.append(_check("caseIII_limit_equals_stationary", err <= 1e-12, err, "rel err <= 1e-12"))
    term = bounds.discrete_bound(0.01, 0.0, consts, 2.0)
    checks.append(_check("discrete_term_alpha2", term == 2.0 * consts.Q, term, "exactly 2Q"))

    gen = RngStream(seed, _CHECK_STREAM + 21).generator()
    a = gen.standard_normal(64)
    b = gen.standard_normal(64)
    err = abs(w1_assignment(a, b) - w1_exact_1d(a, b))
    checks.append(_check("w1_assignment_vs_sorted_1d", err <= 1e-12, err, "<= 1e-12"))
    a6 = gen.standard_normal((6, 3))
    b6 = gen.standard_normal((6, 3))
    cost = np.linalg.norm(a6[:, None, :] - b6[None, :, :], axis=-1)
    brute = min(math.fsum(cost[i, p[i]] for i in range(6)) / 6 for p in itertools.permutations(range(6)))
    err = abs(w1_assignment(a6, b6) - brute)
    checks.append(_check("w1_assignment_vs_permutations", err <= 1e-12, err, "<= 1e-12"))
    v = np.array([0.3, -1.2, 2.0])
    a32 = gen.standard_normal((32, 3))
    err = abs(w1_assignment(a32, a32 + v) - float(np.linalg.norm(v)))
    checks.append(_check("w1_translation", err <= 1e-9, err, "<= 1e-9"))
    return checks

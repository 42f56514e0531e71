"""Command-line entry point: ``levystab <command> [options]``.

Commands: gcurve, stability-sweep, moment-divergence, validate, bounds.

Parameters come from an optional INI-style ``--config`` file (section header
optional) and from flags; flags win. Every report embeds the effective
configuration and seed and contains no timestamps, so reruns are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
4 acceptance or consistency failure, 5 replica divergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .bounds import DomainError
from .dynamics import ReplicaDivergence
from .losses import make_model

SCHEMA_VERSION = "1.0"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_FAILED = 4
EXIT_DIVERGED = 5


class ConfigError(ValueError):
    pass


# -- parsing helpers -----------------------------------------------------------


def float_list(text: str) -> list[float]:
    """``"1.2,1.5"`` or a range ``"start:stop:step"`` (inclusive of stop)."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"not a list of numbers: {text!r}") from None
    if not values:
        raise ConfigError("empty list")
    return values


def int_list(text: str) -> list[int]:
    values = float_list(text)
    if any(v != int(v) for v in values):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def read_config(path: str | None, command: str) -> tuple[dict, str | None]:
    """Flat key/value pairs from ``path``; a ``[command]`` section overrides the rest."""
    if path is None:
        return {}, None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep case: N, C1, C, Q are distinct parameters
    body = text if text.lstrip().startswith("[") else "[DEFAULT]\n" + text
    try:
        parser.read_string(body)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    values = dict(parser.defaults())
    for section in parser.sections():
        if section in (command, "common"):
            values.update(parser[section])
    return {k.replace("-", "_"): v for k, v in values.items()}, text


# Per-command parameters: name -> (converter, default, help)
PARAMS = {
    "gcurve": {
        "alphas": (float_list, "1.01:1.99:0.01", "alpha grid, list or start:stop:step"),
        "ds": (int_list, "1,10,100,1000", "dimensions"),
    },
    "stability-sweep": {
        "model": (str, "quadratic-1d", "quadratic-1d or dissipative-nonconvex"),
        "ns": (int_list, "32,64,128,256,512,1024", "dataset sizes"),
        "alphas": (float_list, "1.5", "tail-indices"),
        "eta": (float, "0.01", "step size"),
        "steps": (int, None, "total steps (default 2 x burn_in)"),
        "burn_in": (int, None, "burn-in steps (default ceil(10/(m eta)))"),
        "replicas": (int, "256", "replicas per (n, alpha)"),
        "delta": (float, "0.5", "perturbation norm of one data point"),
        "cap": (float, "1.0", "surrogate loss cap"),
        "n_fresh": (int, "1000", "fresh points for the population risk"),
        "consistency_mode": (parse_bool, "false", "compare empirical columns with bounds; exit 4 on violation"),
    },
    "moment-divergence": {
        "alpha": (float, "1.5", "tail-index"),
        "ps": (float_list, "0.75,2.0,2.5", "moment orders"),
        "ns": (int_list, "1000,1000000", "sample sizes"),
        "eta": (float, "0.05", "step size"),
        "replicas": (int, "1000", "replicas"),
        "thin": (int, "20", "harvest interval"),
        "rate": (float, "1.0", "OU rate a"),
    },
    "validate": {
        "draws": (int, "100000", "sampler draws per ECF check"),
    },
    "bounds": {
        "model": (str, "quadratic-1d", "quadratic-1d or dissipative-nonconvex"),
        "alpha": (float, "1.5", "tail-index in (1, 2)"),
        "eta": (float, "0.01", "step size"),
        "n": (int, "100", "dataset size"),
        "rho": (float, None, "data discrepancy (default D/n)"),
        "w_norm": (float, "0.0", "norm of the common start"),
        "N": (int, None, "iteration count for the finite-time bound"),
        "cap": (float, "1.0", "surrogate loss cap"),
        "C1": (float, None, "assumed constant C1 (default 1)"),
        "lam": (float, None, "assumed rate lambda (default m/2)"),
        "C": (float, None, "assumed constant C (default 1 + B/m)"),
        "Q": (float, None, "assumed constant Q (default 1)"),
    },
}

DEFAULT_FORMAT = {
    "gcurve": "csv",
    "stability-sweep": "csv",
    "moment-divergence": "csv",
    "validate": "json",
    "bounds": "json",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levystab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for command, params in PARAMS.items():
        p = sub.add_parser(command)
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--config", default=None, help="INI-style parameter file")
        for name, (_, default, help_text) in params.items():
            flag = "--" + name.replace("_", "-")
            p.add_argument(flag, dest=name, default=None, help=f"{help_text} [default: {default}]")
    return parser


def resolve(args: argparse.Namespace) -> tuple[dict, str | None]:
    """Merge defaults, config file and flags (in increasing priority)."""
    file_values, file_text = read_config(args.config, args.command)
    params = PARAMS[args.command]
    unknown = set(file_values) - set(params) - {"seed", "format"}
    if unknown:
        raise ConfigError(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
    cfg = {}
    for name, (conv, default, _) in params.items():
        raw = getattr(args, name)
        if raw is None:
            raw = file_values.get(name, default)
        if raw is None:
            cfg[name] = None
            continue
        try:
            cfg[name] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from None
    seed = args.seed if args.seed is not None else file_values.get("seed", 0)
    fmt = args.format or file_values.get("format") or DEFAULT_FORMAT[args.command]
    try:
        cfg["seed"] = int(seed)
    except ValueError:
        raise ConfigError(f"bad seed {seed!r}") from None
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    cfg["format"] = fmt
    return cfg, file_text


# -- serialization -------------------------------------------------------------


def sanitize(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def json_report(command: str, cfg: dict, file_text: str | None, results, provenance=None) -> str:
    echo = {k: v for k, v in cfg.items() if k not in ("seed",)}
    if file_text is not None:
        echo["config_file_text"] = file_text
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_echo": echo,
        "seed": cfg["seed"],
        "results": results,
        "constants_provenance": provenance or {},
    }
    return json.dumps(sanitize(report), indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


GCURVE_COLUMNS = ["alpha", "d", "g", "g_normalized", "log_g"]
SWEEP_COLUMNS = [
    "n",
    "alpha",
    "rho",
    "mean_coupled_distance",
    "coupled_distance_stderr",
    "w1_empirical",
    "w1_method",
    "generalization_gap",
    "generalization_gap_stderr",
    "stationary_bound",
    "discrete_bound",
    "generalization_bound",
    "discrete_generalization_bound",
    "consistent",
]
MOMENT_COLUMNS = ["p", "N", "moment"]
VALIDATE_COLUMNS = ["check", "passed", "measured", "target"]


# -- commands ---------------------------------------------------------------------


def cmd_gcurve(cfg, file_text, out, stdout) -> int:
    rows = experiments.gcurve_rows(cfg["alphas"], cfg["ds"])
    if cfg["format"] == "csv":
        emit(csv_text(rows, GCURVE_COLUMNS), out, stdout)
    else:
        shape = experiments.gcurve_shape(cfg["alphas"], cfg["ds"])
        emit(json_report("gcurve", cfg, file_text, {"rows": rows, "shape": shape}), out, stdout)
    return EXIT_OK


def cmd_stability_sweep(cfg, file_text, out, stdout) -> int:
    model = make_model(cfg["model"])
    settings = experiments.SweepSettings(
        eta=cfg["eta"],
        steps=cfg["steps"],
        burn_in=cfg["burn_in"],
        replicas=cfg["replicas"],
        delta=cfg["delta"],
        cap=cfg["cap"],
        n_fresh=cfg["n_fresh"],
        consistency_mode=cfg["consistency_mode"],
    )
    res = experiments.stability_sweep(model, cfg["ns"], cfg["alphas"], settings, seed=cfg["seed"])
    prov = {
        "C0": "computed",
        "C1": "external-unspecified",
        "lam": "external-unspecified",
        "C": "external-unspecified",
        "Q": "external-unspecified",
        "bundle": "model-derived",
        "lipschitz": "numerical (surrogate gradient maximum)",
        "diameter": "model-derived",
    }
    report = json_report("stability-sweep", cfg, file_text, res, prov)
    if cfg["format"] == "csv":
        emit(csv_text(res["rows"], SWEEP_COLUMNS), out, stdout)
        if out is not None:
            Path(str(out) + ".json").write_text(report, encoding="utf-8")
    else:
        emit(report, out, stdout)
    if cfg["consistency_mode"] and any(r["consistent"] is False for r in res["rows"]):
        return EXIT_FAILED
    return EXIT_OK


def cmd_moment_divergence(cfg, file_text, out, stdout) -> int:
    res = experiments.moment_divergence(
        cfg["alpha"],
        cfg["ps"],
        cfg["ns"],
        seed=cfg["seed"],
        rate=cfg["rate"],
        eta=cfg["eta"],
        replicas=cfg["replicas"],
        thin=cfg["thin"],
    )
    if cfg["format"] == "csv":
        ratio = {s["p"]: s for s in res["summary"]}
        rows = [dict(r, ratio=ratio[r["p"]]["ratio"], verdict=ratio[r["p"]]["verdict"]) for r in res["rows"]]
        emit(csv_text(rows, MOMENT_COLUMNS + ["ratio", "verdict"]), out, stdout)
    else:
        emit(json_report("moment-divergence", cfg, file_text, res), out, stdout)
    return EXIT_OK


def cmd_validate(cfg, file_text, out, stdout) -> int:
    checks = experiments.validate(seed=cfg["seed"], draws=cfg["draws"])
    if cfg["format"] == "csv":
        rows = [dict(c, measured=json.dumps(sanitize(c["measured"]), sort_keys=True)) for c in checks]
        emit(csv_text(rows, VALIDATE_COLUMNS), out, stdout)
    else:
        summary = {"passed": sum(c["passed"] for c in checks), "total": len(checks)}
        emit(json_report("validate", cfg, file_text, {"checks": checks, "summary": summary}), out, stdout)
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_FAILED


def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    else:
        rows.append({"key": prefix, "value": obj})


def cmd_bounds(cfg, file_text, out, stdout) -> int:
    model = make_model(cfg["model"])
    res = experiments.bounds_report(
        model,
        cfg["alpha"],
        eta=cfg["eta"],
        n=cfg["n"],
        rho_value=cfg["rho"],
        w_norm=cfg["w_norm"],
        N=cfg["N"],
        cap=cfg["cap"],
        C1=cfg["C1"],
        lam=cfg["lam"],
        C=cfg["C"],
        Q=cfg["Q"],
        seed=cfg["seed"],
    )
    if cfg["format"] == "csv":
        rows: list = []
        _flatten("", sanitize(res["results"]), rows)
        _flatten("provenance", res["provenance"], rows)
        emit(csv_text(rows, ["key", "value"]), out, stdout)
    else:
        emit(json_report("bounds", cfg, file_text, res["results"], res["provenance"]), out, stdout)
    return EXIT_OK


COMMANDS = {
    "gcurve": cmd_gcurve,
    "stability-sweep": cmd_stability_sweep,
    "moment-divergence": cmd_moment_divergence,
    "validate": cmd_validate,
    "bounds": cmd_bounds,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg, file_text = resolve(args)
        # divergence is reported through ReplicaDivergence, not floating-point warnings
        with np.errstate(over="ignore", invalid="ignore"):
            return COMMANDS[args.command](cfg, file_text, args.out, stdout)
    except DomainError as exc:
        print(f"levystab: domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except ReplicaDivergence as exc:
        print(f"levystab: divergence: {exc}", file=stderr)
        return EXIT_DIVERGED
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"levystab: configuration error: {exc}", file=stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"levystab: cannot write output: {exc}", file=stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

    latticepf lattice gen --n 256 --dim 2 --out points.csv
    latticepf run-filter --model disk --scheme lpf --n 64 --steps 40 --seed 1 --out run.csv
    latticepf bench disk --n 64,96,128 --trials 200 --steps 40 --seed 7 --out results/

Values resolve as command-line flag, then ``--config`` file, then default.
Failures print one line ``error: <kind>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import report
from .config import load_config
from .errors import ConfigurationError, DegenerateWeightsError, LatticeRangeError, ProjectionError
from .experiments import _FILTER, _SEQUENCE, ExperimentConfig, derive_rng, run_rmse, run_spread
from .filtering import FilterConfig, run_filter
from .lattice import LatticeRule, draw_shift, generator_for, korobov_points
from .models import MODELS, build_model, model_parameters, simulate_sequence

log = logging.getLogger("latticepf")

BENCH_DEFAULTS = {
    "disk": {"n": [64], "trials": 200, "steps": 40},
    "toy": {"n": [16], "trials": 200, "steps": 20},
    "lingauss": {"n": [64], "trials": 200, "steps": 20},
    "body": {"n": [256], "trials": 100, "steps": 40},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file (or a resolved_config.json)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for trials")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="latticepf", description="Lattice and classical particle filters.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    lat = sub.add_parser("lattice", help="lattice utilities")
    lat_sub = lat.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gen = lat_sub.add_parser("gen", parents=[common], help="write a Korobov point set as CSV")
    gen.add_argument("--n", type=int)
    gen.add_argument("--dim", type=int)
    gen.add_argument("--generator", type=int)
    gen.add_argument("--shift-seed", type=int, dest="shift_seed")
    gen.add_argument("--out")

    rf = sub.add_parser("run-filter", parents=[common], help="filter one simulated sequence")
    rf.add_argument("--model", choices=sorted(MODELS))
    rf.add_argument("--scheme", choices=["pf", "lpf"])
    rf.add_argument("--resample", choices=["multinomial", "residual"])
    rf.add_argument("--n", type=int)
    rf.add_argument("--steps", type=int)
    rf.add_argument("--seed", type=int)
    rf.add_argument("--generator", type=int)
    rf.add_argument("--out")

    bench = sub.add_parser("bench", help="multi-trial PF vs LPF benchmark")
    bench_sub = bench.add_subparsers(dest="model", required=True, parser_class=_Parser)
    for name in BENCH_DEFAULTS:
        b = bench_sub.add_parser(name, parents=[common])
        b.add_argument("--n", type=_int_list)
        b.add_argument("--trials", type=int)
        b.add_argument("--steps", type=int)
        b.add_argument("--seed", type=int)
        b.add_argument("--resample", choices=["multinomial", "residual"])
        b.add_argument("--generator", type=int)
        b.add_argument("--out")
    return parser


def _resolve(args, keys: dict) -> dict:
    """Merge flag > config file > default for ``keys`` (name -> default)."""
    file_values = load_config(args.config) if args.config else {}
    out = {}
    for key, default in keys.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_values:
            out[key] = file_values[key]
        else:
            out[key] = default
    return out


def _model_keys(name: str) -> dict:
    return {k: v for k, v in model_parameters(name).items()}


def _require_out(cfg: dict) -> Path:
    if not cfg.get("out"):
        raise UsageError("missing output path (--out)")
    return Path(cfg["out"])


def _cmd_lattice_gen(args) -> None:
    cfg = _resolve(args, {"n": None, "dim": None, "generator": None, "shift_seed": None, "out": None})
    out = _require_out(cfg)
    if cfg["n"] is None or cfg["dim"] is None:
        raise UsageError("--n and --dim are required")
    n, dim = int(cfg["n"]), int(cfg["dim"])
    a = int(cfg["generator"]) if cfg["generator"] is not None else generator_for(n, dim)
    shift = None
    if cfg["shift_seed"] is not None:
        shift = draw_shift(dim, np.random.default_rng(int(cfg["shift_seed"])))
    points = korobov_points(LatticeRule(n, a, dim, shift))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        for row in points:
            fh.write(",".join(report.fmt_float(v) for v in row) + "\n")
    cfg["generator"] = a
    report.write_json(out.parent / "resolved_config.json", cfg)
    log.info("wrote %d points to %s", n, out)


def _cmd_run_filter(args) -> None:
    if args.model is None and not args.config:
        raise UsageError("--model is required")
    base = _resolve(args, {"model": None})
    model_name = base["model"]
    if model_name not in MODELS:
        raise UsageError(f"unknown model {model_name!r}")
    keys = {
        "model": model_name, "scheme": "pf", "resample": "residual", "n": 64, "steps": 40,
        "seed": 0, "generator": None, "out": None, **_model_keys(model_name),
    }
    cfg = _resolve(args, keys)
    out = _require_out(cfg)
    model = build_model(model_name, cfg)
    fconf = FilterConfig(int(cfg["n"]), cfg["resample"], cfg["scheme"], int(cfg["seed"]), cfg["generator"])
    seed = int(cfg["seed"])
    seq = simulate_sequence(model, int(cfg["steps"]), derive_rng(seed, 0, _SEQUENCE))
    run = run_filter(model, seq.observations, seq.states[0], fconf, derive_rng(seed, 0, _FILTER))
    s = model.state_dim
    header = ["t", *(f"est_{k}" for k in range(s)), *(f"true_{k}" for k in range(s)), "error"]
    errors = np.linalg.norm(run.means - seq.states, axis=1)
    rows = ([t, *map(float, run.means[t]), *map(float, seq.states[t]), float(errors[t])] for t in range(len(errors)))
    out.parent.mkdir(parents=True, exist_ok=True)
    report.write_csv(out, header, rows)
    report.write_json(out.parent / "resolved_config.json", cfg)
    log.info("filtered %d steps, mean error %.6g", len(errors), float(errors.mean()))


def _cmd_bench(args) -> None:
    name = args.model
    defaults = BENCH_DEFAULTS[name]
    keys = {
        "model": name, "n": defaults["n"], "trials": defaults["trials"], "steps": defaults["steps"],
        "seed": 0, "resample": "residual", "generator": None, "out": None, **_model_keys(name),
    }
    cfg = _resolve(args, keys)
    if cfg["model"] != name:
        raise UsageError(f"config is for model {cfg['model']!r}, not {name!r}")
    out = _require_out(cfg)
    n_values = _int_list(",".join(map(str, cfg["n"]))) if isinstance(cfg["n"], list) else _int_list(cfg["n"])
    cfg["n"] = n_values
    params = {k: cfg[k] for k in _model_keys(name)}
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    exp = ExperimentConfig(
        model=name, n_values=tuple(n_values), trials=int(cfg["trials"]), steps=int(cfg["steps"]),
        seed=int(cfg["seed"]), resampling=cfg["resample"], generator=cfg["generator"],
        model_params=params, threads=threads,
    )
    log.info("bench %s: n=%s trials=%d steps=%d", name, n_values, exp.trials, exp.steps)
    result = run_spread(exp) if name == "body" else run_rmse(exp)
    out.mkdir(parents=True, exist_ok=True)
    report.write_json(out / "report.json", result.to_dict())
    report.write_csv(out / "rmse.csv", ["scheme", "n", "t", "rmse", "ensemble_std", "failed"], result.csv_rows())
    report.write_plot_script(out / "plot.gp", "rmse.csv", f"bench {name}", [(c.scheme, c.n) for c in result.curves])
    report.write_json(out / "resolved_config.json", cfg)
    for row in result.comparisons():
        log.info("%s", ", ".join(f"{k}={v}" for k, v in row.items()))


def _error_kind(exc: Exception) -> str:
    if isinstance(exc, LatticeRangeError):
        return "invalid_n"
    if isinstance(exc, DegenerateWeightsError):
        return "track_lost"
    if isinstance(exc, (UsageError, argparse.ArgumentTypeError)):
        return "usage"
    if isinstance(exc, (ConfigurationError, ProjectionError, ValueError, KeyError)):
        return "config"
    if isinstance(exc, OSError):
        return "io"
    return "internal"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
        if args.command == "lattice":
            _cmd_lattice_gen(args)
        elif args.command == "run-filter":
            _cmd_run_filter(args)
        else:
            _cmd_bench(args)
    except Exception as exc:  # noqa: BLE001 - reported as one line
        message = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {_error_kind(exc)}: {' '.join(message.split())}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

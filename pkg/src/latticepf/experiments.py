"""Multi-trial comparisons of PF and LPF.

Every random stream is derived from ``(base seed, trial, purpose, ...)`` via
:class:`numpy.random.SeedSequence`, so trials can run in any order or in
parallel and still produce identical reports.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DegenerateWeightsError, LatticeRangeError
from .filtering import PROPOSAL_SCHEMES, FilterConfig, run_filter
from .lattice import check_table_n
from .models import build_model, simulate_sequence, toy_loss_probability

_SEQUENCE, _FILTER, _REFERENCE = 0, 1, 2


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


@dataclass
class ExperimentConfig:
    model: str
    n_values: tuple[int, ...] = (64,)
    trials: int = 200
    steps: int = 40
    seed: int = 0
    schemes: tuple[str, ...] = ("pf", "lpf")
    resampling: str = "residual"
    generator: Optional[int] = None
    model_params: dict = field(default_factory=dict)
    threads: int = 1

    def __post_init__(self):
        self.n_values = tuple(int(n) for n in self.n_values)
        self.schemes = tuple(self.schemes)
        if self.trials < 2:
            raise ConfigurationError("trials must be >= 2")
        if self.steps < 1:
            raise ConfigurationError("steps must be >= 1")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigurationError("particle counts must be >= 1")
        for s in self.schemes:
            if s not in PROPOSAL_SCHEMES:
                raise ConfigurationError(f"unknown scheme {s!r}")
        if "lpf" in self.schemes and self.generator is None and not any(
            _lattice_ok(n) for n in self.n_values
        ):
            check_table_n(self.n_values[0])

    def runs(self) -> list[tuple[str, int]]:
        """(scheme, n) pairs to evaluate; the LPF only where a lattice exists."""
        out = []
        for scheme in self.schemes:
            for n in self.n_values:
                if scheme == "lpf" and self.generator is None and not _lattice_ok(n):
                    continue
                out.append((scheme, n))
        return out

    def filter_config(self, scheme: str, n: int, seed: int = 0) -> FilterConfig:
        return FilterConfig(n, self.resampling, scheme, seed, self.generator if scheme == "lpf" else None)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        d["n_values"] = list(self.n_values)
        d["schemes"] = list(self.schemes)
        return d


def _lattice_ok(n: int) -> bool:
    try:
        check_table_n(n)
    except LatticeRangeError:
        return False
    return True


@dataclass
class Curve:
    """Per-step statistics of one (scheme, n) over all trials."""

    scheme: str
    n: int
    rmse: np.ndarray
    mse: np.ndarray
    ensemble_std: np.ndarray
    rmse_stderr: np.ndarray
    failed: int
    trials: int

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "n": self.n,
            "trials": self.trials,
            "failed": self.failed,
            "rmse": self.rmse,
            "mse": self.mse,
            "ensemble_std": self.ensemble_std,
            "rmse_stderr": self.rmse_stderr,
        }


def curve_from_errors(scheme: str, n: int, errors: list, steps: int) -> Curve:
    """Summarise per-trial error vectors (``None`` marks a failed trial)."""
    ok = np.array([e for e in errors if e is not None]).reshape(-1, steps)
    failed = sum(e is None for e in errors)
    m = len(ok)
    if m == 0:
        nan = np.full(steps, np.nan)
        return Curve(scheme, n, nan, nan, nan, nan, failed, len(errors))
    sq = ok * ok
    mse = sq.mean(axis=0)
    rmse = np.sqrt(mse)
    std = ok.std(axis=0, ddof=1) if m > 1 else np.zeros(steps)
    se_mse = sq.std(axis=0, ddof=1) / math.sqrt(m) if m > 1 else np.zeros(steps)
    with np.errstate(divide="ignore", invalid="ignore"):
        se_rmse = np.where(rmse > 0, se_mse / (2 * rmse), 0.0)
    return Curve(scheme, n, rmse, mse, std, se_rmse, failed, len(errors))


@dataclass
class ExperimentReport:
    model: str
    config: dict
    curves: list[Curve]
    rejected_sequences: int = 0
    extra: dict = field(default_factory=dict)

    def curve(self, scheme: str, n: int) -> Curve:
        for c in self.curves:
            if c.scheme == scheme and c.n == n:
                return c
        raise KeyError(f"no results for scheme={scheme!r} at n={n}")

    def comparisons(self, baseline: str = "pf", candidate: str = "lpf") -> list[dict]:
        out = []
        for c in self.curves:
            if c.scheme != candidate:
                continue
            row = {"baseline": baseline, "candidate": candidate, "n": c.n}
            try:
                row["variance_difference"] = variance_difference(self, baseline, candidate, c.n)
                row["rmse_difference"] = rmse_difference(self, baseline, candidate, c.n)
            except KeyError:
                pass
            try:
                gain = efficiency_gain(self, baseline, candidate, c.n)
                row["efficiency_gain"] = gain.percent
                row["efficiency_gain_beyond_grid"] = gain.beyond_grid
            except (KeyError, ValueError):
                pass
            out.append(row)
        return out

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "config": self.config,
            "rejected_sequences": self.rejected_sequences,
            "curves": [c.to_dict() for c in self.curves],
            "comparisons": self.comparisons(),
            **self.extra,
        }

    def csv_rows(self):
        for c in self.curves:
            for t in range(len(c.rmse)):
                yield (c.scheme, c.n, t, float(c.rmse[t]), float(c.ensemble_std[t]), c.failed)


def variance_difference(report: ExperimentReport, scheme_a: str, scheme_b: str, n: int) -> float:
    """Percent by which ``scheme_b``'s time-averaged MSE is below ``scheme_a``'s."""
    a = report.curve(scheme_a, n).mse
    b = report.curve(scheme_b, n).mse
    return 100.0 * (1.0 - np.mean(b) / np.mean(a))


def rmse_difference(report: ExperimentReport, scheme_a: str, scheme_b: str, n: int) -> float:
    """Same as :func:`variance_difference` on time-averaged RMSE instead of MSE."""
    a = report.curve(scheme_a, n).rmse
    b = report.curve(scheme_b, n).rmse
    return 100.0 * (1.0 - np.mean(b) / np.mean(a))


@dataclass(frozen=True)
class GainEstimate:
    percent: float
    beyond_grid: bool = False
    n_max: int = 0

    def __str__(self) -> str:
        return f">{self.n_max}" if self.beyond_grid else f"{self.percent:.1f}%"


def gain_from_grid(n_grid, mse_grid, target_mse: float, n_ref: int) -> GainEstimate:
    """Extra fraction of particles (in percent) at which the MSE curve reaches ``target_mse``.

    ``log mse`` is interpolated linearly in ``log n`` between grid points; the
    first bracketing segment in increasing ``n`` is used.
    """
    order = np.argsort(n_grid)
    n_grid = np.asarray(n_grid, dtype=float)[order]
    mse_grid = np.asarray(mse_grid, dtype=float)[order]
    if len(n_grid) == 0 or not np.all(mse_grid > 0) or not target_mse > 0:
        raise ValueError("need a non-empty grid of positive MSE values")
    ln, lm, lt = np.log(n_grid), np.log(mse_grid), math.log(target_mse)
    if lm[0] <= lt:
        if len(ln) == 1 or lm[0] == lt or lm[1] == lm[0]:
            return GainEstimate(100.0 * (n_grid[0] / n_ref - 1.0))
        x = ln[0] + (lt - lm[0]) * (ln[1] - ln[0]) / (lm[1] - lm[0])
        return GainEstimate(100.0 * (math.exp(x) / n_ref - 1.0))
    for k in range(len(ln) - 1):
        if lm[k + 1] <= lt:
            x = ln[k] + (lt - lm[k]) * (ln[k + 1] - ln[k]) / (lm[k + 1] - lm[k])
            return GainEstimate(100.0 * (math.exp(x) / n_ref - 1.0))
    return GainEstimate(math.inf, True, int(n_grid[-1]))


def efficiency_gain(report: ExperimentReport, scheme_a: str, scheme_b: str, n_ref: int) -> GainEstimate:
    """Additional particles ``scheme_a`` needs to match ``scheme_b`` at ``n_ref``."""
    target = float(np.mean(report.curve(scheme_b, n_ref).mse))
    grid = [c for c in report.curves if c.scheme == scheme_a]
    if not grid:
        raise KeyError(f"no results for scheme={scheme_a!r}")
    return gain_from_grid([c.n for c in grid], [np.mean(c.mse) for c in grid], target, n_ref)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _simulate(model, config: ExperimentConfig, trial: int):
    return simulate_sequence(model, config.steps, derive_rng(config.seed, trial, _SEQUENCE))


def _run_trial(model, config: ExperimentConfig, trial: int):
    seq = _simulate(model, config, trial)
    errors = {}
    for k, (scheme, n) in enumerate(config.runs()):
        rng = derive_rng(config.seed, trial, _FILTER, k, n)
        try:
            run = run_filter(model, seq.observations, seq.states[0], config.filter_config(scheme, n), rng)
        except DegenerateWeightsError:
            errors[(scheme, n)] = None
            continue
        errors[(scheme, n)] = np.linalg.norm(run.means - seq.states, axis=1)
    return seq.rejected, errors


def run_rmse(config: ExperimentConfig, order=None) -> ExperimentReport:
    """Simulate one fresh sequence per trial and run every (scheme, n) on it.

    The per-step error is the Euclidean distance between the weighted-mean
    estimate and the true state; trials that lose track are counted as
    failed and left out of the RMSE. ``order`` permutes trial execution only.
    """
    model = build_model(config.model, config.model_params)
    trials = list(range(config.trials)) if order is None else list(order)
    if sorted(trials) != list(range(config.trials)):
        raise ValueError("order must be a permutation of the trial ids")
    results = dict(zip(trials, _map(lambda i: _run_trial(model, config, i), trials, config.threads)))
    curves = []
    for scheme, n in config.runs():
        errs = [results[i][1][(scheme, n)] for i in range(config.trials)]
        curves.append(curve_from_errors(scheme, n, errs, config.steps))
    rejected = sum(results[i][0] for i in range(config.trials))
    extra = {}
    if config.model == "toy":
        extra["loss_of_track"] = {
            str(n): {
                "theory_iid": toy_loss_probability(max(config.steps - 1, 1), n, model.threshold),
            }
            for n in config.n_values
        }
        for c in curves:
            extra["loss_of_track"][str(c.n)][f"observed_{c.scheme}"] = c.failed / c.trials
    return ExperimentReport(config.model, config.to_dict(), curves, rejected, extra)


def ground_truth_mean(
    sequence, model, n_large: int, seed: int, resampling: str = "residual", rng=None
) -> np.ndarray:
    """Posterior-mean reference from a single large PF run, ``(T, s)``.

    Losing track here raises: a failed reference is not usable.
    """
    config = FilterConfig(n_large, resampling, "pf", seed)
    return run_filter(model, sequence.observations, sequence.states[0], config, rng).means


@dataclass
class Spread:
    """Ensemble statistics of repeated runs on one fixed sequence, each ``(T, s)``."""

    std: np.ndarray
    mean: np.ndarray
    mad: np.ndarray
    sq_dev: np.ndarray
    failed: int


def ensemble_spread(
    sequence,
    model,
    scheme: str,
    n: int,
    runs: int,
    seed: int,
    reference: np.ndarray | None = None,
    resampling: str = "residual",
    generator: int | None = None,
    threads: int = 1,
) -> Spread:
    """Repeat one filter ``runs`` times on ``sequence`` with independent seeds.

    ``std`` is the per-step, per-component standard deviation of the mean
    estimates; ``mad`` and ``sq_dev`` are the mean absolute and mean squared
    deviations from ``reference`` (zeros when it is omitted).
    """
    if runs < 2:
        raise ConfigurationError("runs must be >= 2")
    config = FilterConfig(n, resampling, scheme, seed, generator if scheme == "lpf" else None)
    code = PROPOSAL_SCHEMES.index(scheme)

    def one(r):
        rng = derive_rng(seed, r, _FILTER, code, n)
        try:
            return run_filter(model, sequence.observations, sequence.states[0], config, rng).means
        except DegenerateWeightsError:
            return None

    means = [m for m in _map(one, range(runs), threads) if m is not None]
    failed = runs - len(means)
    stack = np.array(means)
    if reference is None:
        reference = np.zeros_like(stack[0])
    dev = stack - reference
    return Spread(
        stack.std(axis=0, ddof=1),
        stack.mean(axis=0),
        np.abs(dev).mean(axis=0),
        (dev * dev).mean(axis=0),
        failed,
    )


def run_spread(config: ExperimentConfig) -> ExperimentReport:
    """Repeated runs on one fixed sequence, scored against a 16x-particle PF reference.

    Curves report, per step, RMSE of the mean estimate about the reference
    (over runs and components) and the root mean per-component ensemble
    variance.
    """
    model = build_model(config.model, config.model_params)
    seq = _simulate(model, config, 0)
    curves = []
    spreads = {}
    references = {}
    for n in config.n_values:
        rng = derive_rng(config.seed, 0, _REFERENCE, n)
        ref = ground_truth_mean(seq, model, 16 * n, config.seed, config.resampling, rng)
        references[str(n)] = ref
        for scheme in config.schemes:
            if (scheme, n) not in config.runs():
                continue
            sp = ensemble_spread(
                seq, model, scheme, n, config.trials, config.seed, ref,
                config.resampling, config.generator, config.threads,
            )
            mse = sp.sq_dev.sum(axis=1)
            std = np.sqrt(np.mean(sp.std**2, axis=1))
            m = config.trials - sp.failed
            curves.append(Curve(scheme, n, np.sqrt(mse), mse, std, std / math.sqrt(max(m, 1)), sp.failed, config.trials))
            spreads[f"{scheme}/{n}"] = {"std": sp.std, "mad": sp.mad, "mean": sp.mean}
    extra = {"truth": seq.states, "reference_mean": references, "spread": spreads}
    return ExperimentReport(config.model, config.to_dict(), curves, seq.rejected, extra)

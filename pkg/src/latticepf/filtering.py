"""Particle filter engine: resampling, propagation, reweighting and step loops.

Both filters share ``filter_step``; they differ only in where the uniform
vectors fed to the model's transform come from (:class:`PseudorandomPoints`
or :class:`LatticePoints`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from .errors import ConfigurationError, DegenerateWeightsError
from .lattice import LatticeRule, check_table_n, draw_permutation, draw_shift, generator_for

RESAMPLING_SCHEMES = ("multinomial", "residual")
PROPOSAL_SCHEMES = ("pf", "lpf")


class StateSpaceModel(Protocol):
    """What the engine needs from a model.

    ``transform`` and ``log_likelihood`` are vectorised over a leading
    particle axis: states are ``(n, state_dim)`` arrays.
    """

    state_dim: int

    def transform(self, u: np.ndarray, x_prev: np.ndarray) -> np.ndarray: ...

    def log_likelihood(self, y, x: np.ndarray) -> np.ndarray: ...

    def simulate_transition(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray: ...

    def simulate_observation(self, x: np.ndarray, rng: np.random.Generator): ...


@dataclass
class ParticleSet:
    states: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.states),) or len(self.states) < 1:
            raise ValueError("states and weights must have equal length n >= 1")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")

    @property
    def n(self) -> int:
        return len(self.states)

    @classmethod
    def at_state(cls, x0, n: int) -> "ParticleSet":
        """``n`` copies of ``x0`` with uniform weights."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        return cls(np.tile(x0, (n, 1)), np.full(n, 1.0 / n))


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int
    resampling: str = "residual"
    proposal: str = "pf"
    seed: int = 0
    generator: Optional[int] = None

    def __post_init__(self):
        if self.n_particles < 1:
            raise ConfigurationError("n_particles must be >= 1")
        if self.resampling not in RESAMPLING_SCHEMES:
            raise ConfigurationError(
                f"unknown resampling scheme {self.resampling!r}; "
                f"expected one of {', '.join(RESAMPLING_SCHEMES)}"
            )
        if self.proposal not in PROPOSAL_SCHEMES:
            raise ConfigurationError(
                f"unknown proposal scheme {self.proposal!r}; "
                f"expected one of {', '.join(PROPOSAL_SCHEMES)}"
            )
        # an explicit generator lifts the table restriction (e.g. a=1, n=10)
        if self.proposal == "lpf" and self.generator is None:
            check_table_n(self.n_particles)

    def lattice_rule(self, dims: int) -> LatticeRule:
        a = self.generator if self.generator is not None else generator_for(self.n_particles, dims)
        return LatticeRule(self.n_particles, a, dims)


def normalize_log_weights(log_w: np.ndarray, t: int = -1) -> np.ndarray:
    log_w = np.asarray(log_w, dtype=float)
    top = np.max(log_w)
    if not np.isfinite(top):
        if top == -np.inf:
            raise DegenerateWeightsError(t)
        raise ValueError(f"invalid log-likelihood {top} at step t={t}")
    w = np.exp(log_w - top)
    return w / np.sum(w)


def reweight(particles: ParticleSet, y, model: StateSpaceModel, t: int = -1) -> ParticleSet:
    """Weights proportional to the likelihood of ``y`` at each particle."""
    log_w = model.log_likelihood(y, particles.states)
    return ParticleSet(particles.states, normalize_log_weights(log_w, t))


def _inverse_cdf(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights)
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, len(weights) - 1)


def multinomial_resample(particles: ParticleSet, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. ancestor indices (0-based); consumes ``n`` doubles."""
    return _inverse_cdf(particles.weights, rng.random(particles.n))


def residual_resample(particles: ParticleSet, rng: np.random.Generator) -> np.ndarray:
    """Deterministic floor(n w) copies, the remainder drawn from the residuals.

    Consumes one double per residual slot.
    """
    n = particles.n
    scaled = n * particles.weights / np.sum(particles.weights)
    # absorb rounding so that weights of exactly k/n give k copies
    counts = np.floor(scaled * (1 + 1e-12)).astype(np.int64)
    kept = np.repeat(np.arange(n), counts)
    remaining = n - int(counts.sum())
    if remaining == 0:
        return kept
    residual = np.clip(scaled - counts, 0.0, None)
    return np.concatenate([kept, _inverse_cdf(residual, rng.random(remaining))])


RESAMPLERS: dict[str, Callable[[ParticleSet, np.random.Generator], np.ndarray]] = {
    "multinomial": multinomial_resample,
    "residual": residual_resample,
}


def propagate(particles: ParticleSet, indices, points, model: StateSpaceModel) -> ParticleSet:
    """Push the selected ancestors through ``model.transform``; weights reset to 1/n."""
    indices = np.asarray(indices)
    points = np.atleast_2d(points)
    if len(indices) != len(points):
        raise ValueError("indices and points must have equal length")
    states = model.transform(points, particles.states[indices])
    n = len(states)
    return ParticleSet(states, np.full(n, 1.0 / n))


def estimate(particles: ParticleSet, f: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """Weighted average ``sum_i w_i f(x_i)``; ``f`` acts on the ``(n, s)`` state array."""
    values = particles.states if f is None else np.asarray(f(particles.states), dtype=float)
    return particles.weights @ values


class PseudorandomPoints:
    """Fresh i.i.d. uniforms at every step."""

    def __init__(self, dims: int):
        self.dims = dims

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((n, self.dims))


class LatticePoints:
    """Korobov points with a fresh shift and a fresh permutation per step.

    The shift is drawn before the permutation, so each step consumes
    ``dims + n`` doubles.
    """

    def __init__(self, rule: LatticeRule):
        self.rule = rule
        self.dims = rule.dims
        self.last_rule: LatticeRule | None = None
        self.last_perm: np.ndarray | None = None

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n != self.rule.n:
            raise ConfigurationError(f"lattice has {self.rule.n} points but filter has {n} particles")
        rule = self.rule.with_shift(draw_shift(self.dims, rng))
        perm = draw_permutation(n, rng)
        self.last_rule, self.last_perm = rule, perm
        return rule.points_at(perm)


def filter_step(particles, y, model, points_source, resampling, rng, t: int = -1) -> ParticleSet:
    """Resample, propagate with ``points_source`` uniforms, reweight on ``y``."""
    indices = RESAMPLERS[resampling](particles, rng)
    points = points_source.draw(particles.n, rng)
    moved = propagate(particles, indices, points, model)
    return reweight(moved, y, model, t)


def pf_step(particles, y, model, config: FilterConfig, rng, t: int = -1) -> ParticleSet:
    return filter_step(particles, y, model, PseudorandomPoints(model.state_dim), config.resampling, rng, t)


def lpf_step(particles, y, model, config: FilterConfig, rule: LatticeRule, rng, t: int = -1) -> ParticleSet:
    """One LPF step; ``rule``'s own shift is ignored in favour of a fresh one."""
    _check_rule(rule, model, config.n_particles)
    return filter_step(particles, y, model, LatticePoints(rule), config.resampling, rng, t)


def _check_rule(rule: LatticeRule, model, n: int) -> None:
    if rule.dims != model.state_dim:
        raise ConfigurationError(
            f"lattice dimension {rule.dims} does not match model state dimension {model.state_dim}"
        )
    if rule.n != n:
        raise ConfigurationError(f"lattice has {rule.n} points but config asks for {n} particles")


def make_points_source(model, config: FilterConfig):
    if config.proposal == "pf":
        return PseudorandomPoints(model.state_dim)
    rule = config.lattice_rule(model.state_dim)
    _check_rule(rule, model, config.n_particles)
    return LatticePoints(rule)


@dataclass
class FilterRun:
    """Per-step weighted mean and componentwise second moment."""

    means: np.ndarray
    second_moments: np.ndarray
    final: ParticleSet = field(repr=False)


def run_filter(
    model,
    observations,
    x0,
    config: FilterConfig,
    rng: np.random.Generator | None = None,
    points_source=None,
    on_step: Callable[[int, ParticleSet], None] | None = None,
) -> FilterRun:
    """Filter a whole observation sequence.

    All particles start at ``x0``, which is taken as the state at step 0;
    ``observations[0]`` is therefore not used and steps ``1..T-1`` each run
    one resample / propagate / reweight cycle.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if points_source is None:
        points_source = make_points_source(model, config)
    particles = ParticleSet.at_state(x0, config.n_particles)
    steps = len(observations)
    s = particles.states.shape[1]
    means = np.empty((steps, s))
    second = np.empty((steps, s))
    means[0] = estimate(particles)
    second[0] = estimate(particles, np.square)
    if on_step is not None:
        on_step(0, particles)
    for t in range(1, steps):
        particles = filter_step(particles, observations[t], model, points_source, config.resampling, rng, t)
        means[t] = estimate(particles)
        second[t] = estimate(particles, np.square)
        if on_step is not None:
            on_step(t, particles)
    return FilterRun(means, second, particles)

"""Uniform-transition model with a binary "in the region" observation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ToyBinaryModel:
    """States are i.i.d. uniform on [0, 1); ``y = 1`` iff the state is below ``threshold``.

    With ``truth_in_region`` the simulator keeps the true state inside
    ``[0, threshold)`` so every observation is 1, the worst case for losing track.
    """

    threshold: float = 0.2
    truth_in_region: bool = True
    state_dim: int = 1

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.threshold / 2])

    def transform(self, u, x_prev):
        return np.array(u, dtype=float, copy=True)

    def indicator(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)[..., 0] < self.threshold

    def log_likelihood(self, y, x) -> np.ndarray:
        hit = self.indicator(np.atleast_2d(x))
        return np.where(hit == bool(y), 0.0, -np.inf)

    def simulate_transition(self, x, rng):
        upper = self.threshold if self.truth_in_region else 1.0
        return np.array([upper * rng.random()])

    def simulate_observation(self, x, rng) -> int:
        return int(self.indicator(x))


def toy_loss_probability(k: int, n: int, p: float) -> float:
    """Probability that in at least one of ``k`` steps none of ``n`` i.i.d.
    particles lands in a region of probability ``p``."""
    if k < 1 or n < 1 or not 0 < p <= 1:
        raise ValueError("need k >= 1, n >= 1 and 0 < p <= 1")
    return 1.0 - (1.0 - (1.0 - p) ** n) ** k

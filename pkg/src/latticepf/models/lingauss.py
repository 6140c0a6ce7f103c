"""Scalar Gaussian random walk observed in Gaussian noise, with its Kalman filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..transforms import gaussian_step


@dataclass(frozen=True)
class LinearGaussianModel:
    sigma_tr: float = 1.0
    sigma_obs: float = 1.0
    x0: float = 0.0
    initial_var: float = 0.0
    state_dim: int = 1

    def __post_init__(self):
        if self.sigma_tr < 0 or self.sigma_obs <= 0:
            raise ValueError("sigma_tr must be >= 0 and sigma_obs > 0")

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.x0])

    def transform(self, u, x_prev):
        return gaussian_step(u, x_prev, self.sigma_tr)

    def log_likelihood(self, y, x) -> np.ndarray:
        r = (float(y) - np.atleast_2d(x)[:, 0]) / self.sigma_obs
        return -0.5 * r * r

    def simulate_transition(self, x, rng):
        return x + self.sigma_tr * rng.standard_normal(1)

    def simulate_observation(self, x, rng) -> float:
        return float(x[0] + self.sigma_obs * rng.standard_normal())


def kalman_filter(observations, model: LinearGaussianModel):
    """Exact posterior means and variances, one per observation.

    The prior is ``N(x0, initial_var)`` at time 0 and ``observations[k]``
    is taken at time ``k + 1``.
    """
    q = model.sigma_tr**2
    r = model.sigma_obs**2
    m, p = model.x0, model.initial_var
    means, variances = [], []
    for y in observations:
        p = p + q
        gain = p / (p + r)
        m = m + gain * (float(y) - m)
        p = (1.0 - gain) * p
        means.append(m)
        variances.append(p)
    return np.array(means), np.array(variances)

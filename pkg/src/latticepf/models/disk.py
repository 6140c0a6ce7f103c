"""Binary disk moving by a Gaussian random walk, seen in pixel noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..transforms import gaussian_step


@dataclass(frozen=True)
class DiskModel:
    """Disk tracker.

    ``sigma_x`` drives the simulated truth while the filter proposes with the
    wider ``sigma_d``. Pixel ``(row, col)`` sits at position ``(x=col, y=row)``.
    """

    image_size: int = 128
    radius: float = 16.0
    sigma_x: float = 3.0
    sigma_d: float = 5.0
    sigma_nu: float = 0.25
    margin: float = 20.0
    state_dim: int = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.sigma_x < 0 or self.sigma_d < 0 or self.sigma_nu < 0:
            raise ValueError("standard deviations must be non-negative")

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.image_size / 2, self.image_size / 2])

    def render(self, center) -> np.ndarray:
        cx, cy = map(float, center)
        ys, xs = np.mgrid[0 : self.image_size, 0 : self.image_size]
        return ((xs - cx) ** 2 + (ys - cy) ** 2 <= self.radius * self.radius).astype(float)

    def observe(self, center, rng) -> np.ndarray:
        image = self.render(center)
        if self.sigma_nu > 0:
            image = image + self.sigma_nu * rng.standard_normal(image.shape)
        return image

    simulate_observation = observe

    def simulate_transition(self, x, rng):
        return x + self.sigma_x * rng.standard_normal(2)

    def accepts(self, states) -> bool:
        lo, hi = self.margin, self.image_size - self.margin
        return bool(np.all((states >= lo) & (states <= hi)))

    def transform(self, u, x_prev):
        return gaussian_step(u, x_prev, self.sigma_d)

    def full_log_likelihood(self, image, center) -> float:
        """Gaussian pixel log-likelihood summed over the whole image, constants dropped."""
        diff = np.asarray(image, dtype=float) - self.render(center)
        return float(-np.sum(diff * diff) / (2 * self.sigma_nu**2))

    def log_likelihood(self, image, centers) -> np.ndarray:
        """Batched log-likelihood, evaluated row by row over each candidate disk.

        Since ``sum (I - m)^2 = sum I^2 - sum_{disk} (2I - 1)``, only pixels
        inside the candidate disk matter; the result equals
        :meth:`full_log_likelihood` plus ``sum I^2 / (2 sigma_nu^2)``, which
        does not depend on the candidate.
        """
        image = np.asarray(image, dtype=float)
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        h, w = image.shape
        prefix = np.zeros((h, w + 1))
        np.cumsum(2.0 * image - 1.0, axis=1, out=prefix[:, 1:])

        r = self.radius
        r2 = r * r
        cx = centers[:, 0:1]
        cy = centers[:, 1:2]
        rows = np.floor(cy - r) + np.arange(2 * math.ceil(r) + 2)[None, :]
        dy2 = (rows - cy) ** 2
        half = np.sqrt(np.maximum(r2 - dy2, 0.0))
        lo = np.ceil(cx - half)
        hi = np.floor(cx + half)
        # snap the row limits to the exact membership test used by render()
        lo = np.where((lo - 1 - cx) ** 2 + dy2 <= r2, lo - 1, lo)
        lo = np.where((lo - cx) ** 2 + dy2 <= r2, lo, lo + 1)
        hi = np.where((hi + 1 - cx) ** 2 + dy2 <= r2, hi + 1, hi)
        hi = np.where((hi - cx) ** 2 + dy2 <= r2, hi, hi - 1)

        valid = (dy2 <= r2) & (rows >= 0) & (rows < h)
        lo = np.clip(lo, 0, w)
        hi = np.clip(hi, -1, w - 1)
        valid &= hi >= lo
        row_idx = np.clip(rows, 0, h - 1).astype(np.intp)
        lo_i = np.where(valid, lo, 0).astype(np.intp)
        hi_i = np.where(valid, hi + 1, 0).astype(np.intp)
        sums = prefix[row_idx, hi_i] - prefix[row_idx, lo_i]
        total = np.sum(np.where(valid, sums, 0.0), axis=1)
        return total / (2 * self.sigma_nu**2)


def disk_render(center, model: DiskModel | None = None) -> np.ndarray:
    return (model or DiskModel()).render(center)


def disk_observe(center, rng, model: DiskModel | None = None) -> np.ndarray:
    return (model or DiskModel()).observe(center, rng)


def disk_log_likelihood(image, center, model: DiskModel | None = None) -> float:
    return (model or DiskModel()).full_log_likelihood(image, center)

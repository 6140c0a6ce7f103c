"""Ten-angle lower-body linkage observed by a binocular pinhole pair.

State layout (radians)::

    0 pelvis about Z     1 pelvis about Y
    2-4 left hip  Z, X, Y (intrinsic)     5 left knee about X
    6-8 right hip Z, X, Y (intrinsic)     9 right knee about X

Markers, in order: left hip, right hip, left knee, right knee, left ankle,
right ankle. Z points up, Y is the viewing direction, the left hip sits on +X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ProjectionError
from ..transforms import gaussian_step

N_ANGLES = 10
N_MARKERS = 6

_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])


def _rot(axis: str, theta: np.ndarray) -> np.ndarray:
    """Stack of rotation matrices ``(n, 3, 3)`` about a coordinate axis."""
    c, s = np.cos(theta), np.sin(theta)
    o, z = np.ones_like(theta), np.zeros_like(theta)
    if axis == "x":
        m = [[o, z, z], [z, c, -s], [z, s, c]]
    elif axis == "y":
        m = [[c, z, s], [z, o, z], [-s, z, c]]
    else:
        m = [[c, -s, z], [s, c, z], [z, z, o]]
    return np.moveaxis(np.array(m), (0, 1), (-2, -1))


def _apply(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("nij,j->ni", r, v) if v.ndim == 1 else np.einsum("nij,nj->ni", r, v)


@dataclass(frozen=True)
class BodyModel:
    pelvis_width: float = 0.30
    thigh_length: float = 0.45
    shin_length: float = 0.45
    view_distance: float = 2.5
    spine_height: float = 1.0
    baseline: float = 0.06
    sigma_obs: float = 0.002
    sigma_a: float = 0.1
    sigma_truth: float = 0.05
    state_dim: int = N_ANGLES

    @property
    def anchor(self) -> np.ndarray:
        return np.array([0.0, self.view_distance, self.spine_height])

    @property
    def cameras(self) -> np.ndarray:
        b = self.baseline / 2
        return np.array([[-b, 0.0, 0.0], [b, 0.0, 0.0]])

    @property
    def initial_state(self) -> np.ndarray:
        return np.zeros(N_ANGLES)

    def kinematics(self, angles, anchor=None):
        """Markers ``(n, 6, 3)`` plus, per angle, its world axis and pivot ``(n, 10, 3)``."""
        q = np.atleast_2d(np.asarray(angles, dtype=float))
        n = len(q)
        anchor = self.anchor if anchor is None else np.asarray(anchor, dtype=float)
        root = np.broadcast_to(anchor, (n, 3))
        axes = np.empty((n, N_ANGLES, 3))
        pivots = np.empty((n, N_ANGLES, 3))
        markers = np.empty((n, N_MARKERS, 3))

        rz = _rot("z", q[:, 0])
        axes[:, 0] = _EZ
        axes[:, 1] = _apply(rz, _EY)
        pivots[:, 0:2] = root[:, None]
        pelvis = rz @ _rot("y", q[:, 1])

        for side, sign, base in ((0, 1.0, 2), (1, -1.0, 6)):
            hip = root + _apply(pelvis, np.array([sign * self.pelvis_width / 2, 0.0, 0.0]))
            r1 = pelvis @ _rot("z", q[:, base])
            r2 = r1 @ _rot("x", q[:, base + 1])
            leg = r2 @ _rot("y", q[:, base + 2])
            axes[:, base] = _apply(pelvis, _EZ)
            axes[:, base + 1] = _apply(r1, _EX)
            axes[:, base + 2] = _apply(r2, _EY)
            pivots[:, base : base + 3] = hip[:, None]
            knee = hip + _apply(leg, np.array([0.0, 0.0, -self.thigh_length]))
            shin = leg @ _rot("x", q[:, base + 3])
            axes[:, base + 3] = _apply(leg, _EX)
            pivots[:, base + 3] = knee
            ankle = knee + _apply(shin, np.array([0.0, 0.0, -self.shin_length]))
            markers[:, side] = hip
            markers[:, 2 + side] = knee
            markers[:, 4 + side] = ankle
        return markers, axes, pivots

    def forward_kinematics(self, angles, anchor=None) -> np.ndarray:
        """Marker positions; ``(6, 3)`` for one pose, ``(n, 6, 3)`` for a batch."""
        markers = self.kinematics(angles, anchor)[0]
        return markers[0] if np.ndim(angles) == 1 else markers

    def predicted_observations(self, angles) -> np.ndarray:
        """Projected markers ``(n, 2 cameras, 6, 2)``."""
        markers = self.kinematics(angles)[0]
        return np.stack([project(markers, c) for c in self.cameras], axis=1)

    def observe(self, angles, rng) -> np.ndarray:
        d = self.predicted_observations(angles)[0]
        if self.sigma_obs > 0:
            d = d + self.sigma_obs * rng.standard_normal(d.shape)
        return d

    simulate_observation = observe

    def simulate_transition(self, x, rng):
        return x + self.sigma_truth * rng.standard_normal(N_ANGLES)

    def transform(self, u, x_prev):
        return gaussian_step(u, x_prev, self.sigma_a)

    def log_likelihood(self, observations, angles) -> np.ndarray:
        """Sum over both cameras and all markers of ``-|d - d_hat|^2 / (2 sigma^2)``."""
        resid = np.asarray(observations, dtype=float)[None] - self.predicted_observations(angles)
        return -np.sum(resid * resid, axis=(1, 2, 3)) / (2 * self.sigma_obs**2)

    def log_likelihood_grad(self, observations, angles) -> np.ndarray:
        """Analytic gradient of :meth:`log_likelihood` with respect to the angles, ``(n, 10)``."""
        q = np.atleast_2d(np.asarray(angles, dtype=float))
        markers, axes, pivots = self.kinematics(q)
        # dp_m/dq_j = axis_j x (p_m - pivot_j) for every marker downstream of joint j
        dp = np.cross(axes[:, None, :, :], markers[:, :, None, :] - pivots[:, None, :, :])
        dp *= _DOWNSTREAM[None, :, :, None]
        obs = np.asarray(observations, dtype=float)
        grad = np.zeros((len(q), N_ANGLES))
        for k, cam in enumerate(self.cameras):
            rel = markers - cam
            depth = rel[..., 1]
            if np.any(depth == 0):
                raise ProjectionError("marker lies in the camera plane")
            d_hat = np.stack([rel[..., 0], rel[..., 2]], axis=-1) / depth[..., None]
            resid = obs[k][None] - d_hat
            # d d_hat / dp for each marker: rows (u, v), columns (x, y, z)
            ddx = dp[..., 0] / depth[..., None] - rel[..., 0, None] * dp[..., 1] / depth[..., None] ** 2
            ddz = dp[..., 2] / depth[..., None] - rel[..., 2, None] * dp[..., 1] / depth[..., None] ** 2
            grad += np.einsum("nm,nmj->nj", resid[..., 0], ddx) + np.einsum("nm,nmj->nj", resid[..., 1], ddz)
        return grad / self.sigma_obs**2


# marker m depends on angle j
_DOWNSTREAM = np.zeros((N_MARKERS, N_ANGLES))
_DOWNSTREAM[:, 0:2] = 1
for _side, _base in ((0, 2), (1, 6)):
    _DOWNSTREAM[2 + _side, _base : _base + 3] = 1
    _DOWNSTREAM[4 + _side, _base : _base + 4] = 1


def project(marker, camera) -> np.ndarray:
    """Pinhole projection along +Y: ``((X - Xc) / (Y - Yc), (Z - Zc) / (Y - Yc))``."""
    rel = np.asarray(marker, dtype=float) - np.asarray(camera, dtype=float)
    depth = rel[..., 1]
    if np.any(depth == 0):
        raise ProjectionError("marker lies in the camera plane (Y_m == Y_c)")
    return np.stack([rel[..., 0], rel[..., 2]], axis=-1) / depth[..., None]


def body_forward_kinematics(angles, model: BodyModel | None = None) -> np.ndarray:
    return (model or BodyModel()).forward_kinematics(angles)


def body_log_likelihood(observations, angles, model: BodyModel | None = None):
    ll = (model or BodyModel()).log_likelihood(observations, angles)
    return float(ll[0]) if np.ndim(angles) == 1 else ll

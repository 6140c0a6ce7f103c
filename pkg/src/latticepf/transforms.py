"""Uniform-to-Gaussian transforms used by the model transition functions."""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

CLAMP_EPS = 1e-12

# Acklam's rational approximation to the normal quantile (rel. error ~1.15e-9)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _norm_cdf(z):
    return 0.5 * erfc(-z / np.sqrt(2.0))


def _acklam(p: np.ndarray) -> np.ndarray:
    z = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    q = p[mid] - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    z[mid] = num / den

    for mask, sign, tail in ((lo, 1.0, p[lo]), (hi, -1.0, 1.0 - p[hi])):
        q = np.sqrt(-2.0 * np.log(tail))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        z[mask] = sign * num / den
    return z


def inv_normal_cdf(u):
    """Standard normal quantile.

    Rational approximation followed by one Halley step against an
    erfc-based CDF. Raises ``ValueError`` outside the open unit interval.
    """
    p = np.asarray(u, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("inv_normal_cdf is defined on the open interval (0, 1)")
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    z = _acklam(p)
    # refine in the tail closer to zero so 1 - p does not lose digits
    upper = p > 0.5
    zz = np.where(upper, -z, z)
    pp = np.where(upper, 1.0 - p, p)
    e = _norm_cdf(zz) - pp
    d = e * np.sqrt(2.0 * np.pi) * np.exp(0.5 * zz * zz)
    zz = zz - d / (1.0 + 0.5 * zz * d)
    z = np.where(upper, -zz, zz)
    z[p == 0.5] = 0.0
    return float(z[0]) if scalar else z


def clamp_unit(u, eps: float = CLAMP_EPS):
    """Clamp into ``[eps, 1 - eps]`` so lattice zeros can be inverted."""
    return np.clip(u, eps, 1.0 - eps)


def gaussian_step(u, x_prev, sigma):
    """Gaussian random-walk transition driven by uniforms.

    ``x_prev + sigma * inv_normal_cdf(u)`` componentwise; broadcasts over a
    leading particle axis.
    """
    u = np.asarray(u, dtype=float)
    x_prev = np.asarray(x_prev, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if u.shape[-1] != x_prev.shape[-1] or (sigma.ndim and sigma.shape[-1] != u.shape[-1]):
        raise ValueError("dimension mismatch between u, x_prev and sigma")
    if np.any(sigma < 0):
        raise ValueError("sigma must be non-negative")
    return x_prev + sigma * inv_normal_cdf(clamp_unit(u))

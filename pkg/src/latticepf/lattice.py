"""Shifted Korobov lattice rules and the per-step point assignment of the LPF.

A Korobov rule with ``n`` points and generator ``a`` in ``s`` dimensions is

    U_i = (i/n * (1, a, a^2, ..., a^(s-1)) + shift) mod 1,   i = 0, ..., n-1

Indices are 0-based throughout; ``i`` here corresponds to ``i - 1`` in the
usual 1-based notation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LatticeRangeError

MIN_LOG2_N = 4
MAX_LOG2_N = 21
LOW_DIM_MAX = 8
HIGH_DIM_MAX = 32

# log2(n) -> (a for dims <= 8, a for dims 9..32)
_GENERATORS: dict[int, tuple[int, int]] = {
    4: (3, 3),
    5: (5, 5),
    6: (11, 5),
    7: (13, 11),
    8: (25, 75),
    9: (55, 51),
    10: (43, 139),
    11: (259, 519),
    12: (307, 1081),
    13: (699, 1289),
    14: (2087, 2961),
    15: (7243, 2149),
    16: (11035, 21553),
    17: (27891, 27383),
    18: (18373, 3597),
    19: (21643, 120079),
    20: (201579, 172565),
    21: (431119, 232501),
}


def generator_table() -> dict[tuple[int, str], int]:
    """All tabulated generators keyed by ``(log2 n, "low" | "high")``."""
    table = {}
    for log2n, (a_low, a_high) in _GENERATORS.items():
        table[(log2n, "low")] = a_low
        table[(log2n, "high")] = a_high
    return table


def _log2_exact(n: int) -> int | None:
    if n < 1 or n & (n - 1):
        return None
    return n.bit_length() - 1


def check_table_n(n: int) -> int:
    """Return log2(n), raising if n is not a tabulated power of two."""
    log2n = _log2_exact(int(n))
    if log2n is None or not MIN_LOG2_N <= log2n <= MAX_LOG2_N:
        raise LatticeRangeError(
            f"n={n} is not supported: lattice sample counts must be a power of two "
            f"2^k with k in {MIN_LOG2_N}..{MAX_LOG2_N} "
            f"({2**MIN_LOG2_N}..{2**MAX_LOG2_N})"
        )
    return log2n


def generator_for(n: int, state_dim: int) -> int:
    """Look up the tabulated generator for ``n`` points in ``state_dim`` dimensions.

    Dimensions up to 8 use the low-dimension column, 9 to 32 the high one.
    """
    log2n = check_table_n(n)
    if not 1 <= state_dim <= HIGH_DIM_MAX:
        raise LatticeRangeError(
            f"state_dim={state_dim} is not supported: valid dimensions are 1..{HIGH_DIM_MAX}"
        )
    a_low, a_high = _GENERATORS[log2n]
    return a_low if state_dim <= LOW_DIM_MAX else a_high


def power_vector(a: int, n: int, dims: int) -> np.ndarray:
    """``(1, a, a^2, ...) mod n`` with reduction at every step (exact integers)."""
    out = np.empty(dims, dtype=np.int64)
    p = 1 % n
    for k in range(dims):
        out[k] = p
        p = (p * a) % n
    return out


@dataclass(frozen=True)
class LatticeRule:
    """A shifted rank-1 Korobov rule.

    Parameters
    ----------
    n : int
        Number of points.
    a : int
        Generator, coprime to ``n``.
    dims : int
        Point dimension.
    shift : array_like, optional
        Random shift in ``[0, 1)^dims``; zero when omitted.
    """

    n: int
    a: int
    dims: int
    shift: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n < 1:
            raise LatticeRangeError(f"n must be positive, got {self.n}")
        if self.dims < 1:
            raise LatticeRangeError(f"dims must be positive, got {self.dims}")
        if self.n > 1 and not 1 <= self.a < self.n:
            raise LatticeRangeError(f"generator a={self.a} must lie in [1, {self.n - 1}]")
        if math.gcd(self.a, self.n) != 1:
            raise LatticeRangeError(f"generator a={self.a} is not coprime to n={self.n}")
        shift = np.zeros(self.dims) if self.shift is None else np.asarray(self.shift, float)
        if shift.shape != (self.dims,):
            raise LatticeRangeError(f"shift must have shape ({self.dims},), got {shift.shape}")
        if np.any(shift < 0.0) or np.any(shift >= 1.0):
            raise LatticeRangeError("shift components must lie in [0, 1)")
        shift = shift.copy()
        shift.setflags(write=False)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def from_table(cls, n: int, dims: int, shift=None) -> "LatticeRule":
        return cls(n, generator_for(n, dims), dims, shift)

    def with_shift(self, shift) -> "LatticeRule":
        return LatticeRule(self.n, self.a, self.dims, shift)

    @property
    def powers(self) -> np.ndarray:
        return power_vector(self.a, self.n, self.dims)

    def points_at(self, indices) -> np.ndarray:
        """Points for the given 0-based point indices, shape ``(len(indices), dims)``."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError(f"point index out of range for n={self.n}")
        # idx * power < 2^21 * 2^21, safe in int64
        residues = (idx[:, None] * self.powers[None, :]) % self.n
        pts = residues / self.n + self.shift
        pts -= np.floor(pts)
        # x + shift can round up to exactly 1.0
        pts[pts >= 1.0] = 0.0
        return pts


def korobov_points(rule: LatticeRule) -> np.ndarray:
    """All ``rule.n`` points in index order, shape ``(n, dims)``."""
    return rule.points_at(np.arange(rule.n))


def draw_shift(dims: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform shift on ``[0, 1)^dims``; consumes ``dims`` doubles."""
    if dims < 1:
        raise ValueError("dims must be positive")
    return rng.random(dims)


def draw_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random permutation of ``0..n-1``.

    Ranks ``n`` uniform doubles (stable argsort), so exactly ``n`` doubles are
    consumed per call. Ties have probability ~n^2 2^-53 and only break
    uniformity negligibly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return np.argsort(rng.random(n), kind="stable")


@dataclass(frozen=True)
class PermutationSchedule:
    """One independent uniform permutation per time step."""

    n: int
    perms: tuple[np.ndarray, ...]

    @classmethod
    def draw(cls, n: int, steps: int, rng: np.random.Generator) -> "PermutationSchedule":
        return cls(n, tuple(draw_permutation(n, rng) for _ in range(steps)))


def lpf_point(t: int, i: int, rule: LatticeRule, schedule: PermutationSchedule) -> np.ndarray:
    """Point assigned to particle ``i`` at step ``t``: ``U[perm_t[i]]`` of ``rule``.

    ``rule`` must already carry the shift for step ``t``.
    """
    if not 0 <= i < rule.n:
        raise IndexError(f"particle index {i} out of range for n={rule.n}")
    if schedule.n != rule.n:
        raise ValueError("schedule and rule disagree on n")
    return rule.points_at([schedule.perms[t][i]])[0]


def lpf_points(rule: LatticeRule, perm: np.ndarray) -> np.ndarray:
    """Points for all particles at one step, row ``i`` being ``U[perm[i]]``."""
    return rule.points_at(perm)

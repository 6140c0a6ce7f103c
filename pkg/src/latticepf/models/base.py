"""Simulated trajectories shared by all models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

MAX_REJECTIONS = 1000


@dataclass
class Sequence:
    """Ground-truth states ``(T, s)`` and the matching observations.

    ``states[0]`` is the known initial state; ``rejected`` counts trajectories
    thrown away because they left the model's valid region.
    """

    states: np.ndarray
    observations: list[Any]
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.states)


def simulate_sequence(model, steps: int, rng: np.random.Generator) -> Sequence:
    """Simulate ``steps`` frames from the model's true dynamics.

    Models exposing ``accepts(states)`` get trajectories regenerated (from the
    continuing ``rng`` stream) until one is accepted.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    accepts = getattr(model, "accepts", None)
    for rejected in range(MAX_REJECTIONS):
        states = np.empty((steps, model.state_dim))
        states[0] = model.initial_state
        for t in range(1, steps):
            states[t] = model.simulate_transition(states[t - 1], rng)
        if accepts is None or accepts(states):
            break
    else:
        raise RuntimeError(f"no acceptable trajectory after {MAX_REJECTIONS} attempts")
    observations = [model.simulate_observation(x, rng) for x in states]
    return Sequence(states, observations, rejected)

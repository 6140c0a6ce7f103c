"""Built-in state-space models and the name -> model registry used by the CLI."""

from __future__ import annotations

import dataclasses

from .base import Sequence, simulate_sequence
from .body import BodyModel, body_forward_kinematics, body_log_likelihood, project
from .disk import DiskModel, disk_log_likelihood, disk_observe, disk_render
from .lingauss import LinearGaussianModel, kalman_filter
from .toy import ToyBinaryModel, toy_loss_probability

MODELS = {
    "toy": ToyBinaryModel,
    "lingauss": LinearGaussianModel,
    "disk": DiskModel,
    "body": BodyModel,
}


def model_parameters(name: str) -> dict:
    """Configurable parameters of a model with their defaults."""
    cls = MODELS[name]
    return {
        f.name: f.default
        for f in dataclasses.fields(cls)
        if f.name != "state_dim"
    }


def build_model(name: str, params: dict | None = None):
    """Instantiate model ``name``; keys in ``params`` not used by it are ignored."""
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; expected one of {', '.join(MODELS)}")
    known = model_parameters(name)
    kwargs = {}
    for key, value in (params or {}).items():
        if key not in known:
            continue
        default = known[key]
        if isinstance(default, bool) and isinstance(value, str):
            kwargs[key] = value.strip().lower() in ("1", "true", "yes", "on")
        else:
            kwargs[key] = type(default)(value)
    return MODELS[name](**kwargs)


__all__ = [
    "BodyModel", "DiskModel", "LinearGaussianModel", "MODELS", "Sequence", "ToyBinaryModel",
    "body_forward_kinematics", "body_log_likelihood", "build_model", "disk_log_likelihood",
    "disk_observe", "disk_render", "kalman_filter", "model_parameters", "project",
    "simulate_sequence", "toy_loss_probability",
]

"""Particle filters driven by randomly shifted Korobov lattice rules."""

from .errors import ConfigurationError, DegenerateWeightsError, LatticeRangeError, ProjectionError
from .filtering import (
    FilterConfig,
    LatticePoints,
    ParticleSet,
    PseudorandomPoints,
    estimate,
    filter_step,
    lpf_step,
    multinomial_resample,
    pf_step,
    propagate,
    residual_resample,
    reweight,
    run_filter,
)
from .lattice import (
    LatticeRule,
    PermutationSchedule,
    draw_permutation,
    draw_shift,
    generator_for,
    korobov_points,
    lpf_point,
)
from .transforms import gaussian_step, inv_normal_cdf

__version__ = "0.1.0"

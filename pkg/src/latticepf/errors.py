"""Exception types shared across the package."""


class LatticeRangeError(ValueError):
    """Lattice parameters outside the tabulated / valid range."""


class ConfigurationError(ValueError):
    """Inconsistent filter or experiment configuration."""


class DegenerateWeightsError(RuntimeError):
    """Every particle has zero likelihood: the filter has lost track."""

    def __init__(self, t: int):
        super().__init__(f"all particle likelihoods are zero at step t={t}")
        self.t = t


class ProjectionError(ValueError):
    """Point lies in the camera plane (zero depth)."""

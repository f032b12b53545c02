"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A matrix function was asked for outside its domain (e.g. log of a
    nonpositive eigenvalue)."""


class NumericalError(RuntimeError):
    """An eigendecomposition or other dense kernel failed to converge."""


class DimensionMismatch(ValueError):
    pass


class NotSmallError(ValueError):
    """Perturbation norm is not strictly inside the admissible radius."""

    def __init__(self, message, norm=None, radius=None):
        super().__init__(message)
        self.norm = norm
        self.radius = radius


class HoodRadiusError(NotSmallError):
    pass


class ProvenanceError(ValueError):
    """A state or score is used with a base point it was not built over."""

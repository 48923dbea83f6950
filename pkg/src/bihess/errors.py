"""Exception types raised across the package."""
import numpy as np


class InvalidArgumentError(ValueError):
    pass


class DegenerateGeometryError(ValueError):
    pass


class TopologyError(ValueError):
    pass


class PointLocationError(ValueError):
    """A query point lies outside every triangle of the mesh."""


class EvaluationError(ValueError):
    """A user-supplied field returned non-finite values."""


class DegeneratePatchError(RuntimeError):
    """No recovery patch satisfying the least-squares rank condition exists."""


class DefinitenessError(np.linalg.LinAlgError):
    """Factorization met a non-positive pivot."""

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class UndefinedEffectivityError(ZeroDivisionError):
    pass

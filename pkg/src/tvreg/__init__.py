"""Total-variation-regularized regression and classification on masked 3D grids."""

from .exceptions import ConvergenceWarning, FormatError
from .grid import (
    Mask,
    MaskedVolume,
    VectorField,
    divergence,
    gradient,
    laplacian_lipschitz,
    tv,
)
from .spectral import power_iteration_norm

__version__ = "0.1.0"

__all__ = [
    "ConvergenceWarning",
    "FormatError",
    "Mask",
    "MaskedVolume",
    "VectorField",
    "divergence",
    "gradient",
    "laplacian_lipschitz",
    "power_iteration_norm",
    "tv",
    "__version__",
]

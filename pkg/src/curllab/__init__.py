"""Structured-grid laboratory for curl-constrained hyperbolic systems."""

__version__ = "0.1.0"

from ._kernels import active_backend, available_backends, use_backend
from .core import (
    ConstraintError,
    Formulation,
    Grid2D,
    ModelParams,
    PositivityError,
)
from .curlfree import run_curlfree
from .fv_solver import SolverConfig, run
from .models import glm_system, godunov_powell_system, original_system

__all__ = [
    "__version__",
    "ConstraintError",
    "Formulation",
    "Grid2D",
    "ModelParams",
    "PositivityError",
    "SolverConfig",
    "active_backend",
    "available_backends",
    "glm_system",
    "godunov_powell_system",
    "original_system",
    "run",
    "run_curlfree",
    "use_backend",
]

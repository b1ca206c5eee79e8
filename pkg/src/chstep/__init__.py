"""Variable-step BDF2 solver for the 2-D periodic Cahn-Hilliard equation."""

from ._accel import BACKEND
from .grid import Grid
from .kernels import TimeMesh
from .schemes import FixedPointConfig, ModelParams, SolverState

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Grid",
    "TimeMesh",
    "ModelParams",
    "SolverState",
    "FixedPointConfig",
    "__version__",
]

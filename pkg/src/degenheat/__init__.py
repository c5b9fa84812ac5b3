"""Numerical laboratory for the degenerate operator m(x)(1+|x|^alpha) Laplacian on R^N."""
from .model import ProblemParams, weight_value, mu_density, apply_L_power, lyapunov_check
from .discretize import Grading, RadialGrid, build_grid, assemble_mode_operator
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Grading",
    "ProblemParams",
    "RadialGrid",
    "apply_L_power",
    "assemble_mode_operator",
    "build_grid",
    "lyapunov_check",
    "mu_density",
    "weight_value",
]

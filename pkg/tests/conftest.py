"""Shared fixtures: small spectra reused across test modules."""
from __future__ import annotations

import pytest

from degenheat.discretize import build_grid
from degenheat.model import ProblemParams
from degenheat.spectral import solve_modes


@pytest.fixture(scope="session")
def control_params():
    return ProblemParams(3, 0.0, "unit", 1.0)


@pytest.fixture(scope="session")
def control_spectrum(control_params):
    grid = build_grid(control_params, 400, "uniform")
    return solve_modes(control_params, grid, ell_max=6)


@pytest.fixture(scope="session")
def params_a4():
    return ProblemParams(3, 4.0, "unit", 64.0)


@pytest.fixture(scope="session")
def spectrum_a4(params_a4):
    grid = build_grid(params_a4, 400)
    return solve_modes(params_a4, grid, ell_max=12)


@pytest.fixture(scope="session")
def params_a3():
    return ProblemParams(3, 3.0, "unit", 256.0)


@pytest.fixture(scope="session")
def spectrum_a3(params_a3):
    grid = build_grid(params_a3, 500)
    return solve_modes(params_a3, grid, ell_max=12)

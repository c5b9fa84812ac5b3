import math

import numpy as np
import pytest
from scipy.integrate import quad

from degenheat.discretize import DiscreteFunction, assemble_mode_operator, build_grid
from degenheat.model import ProblemParams, weight_value
from degenheat.potentials import (
    JParams,
    fit_j_exponent,
    iteration_plan,
    j_csv,
    j_integral,
    j_tail,
    newtonian_radial,
)
from degenheat.spectral import ground_state, solve_modes

FLAT = ProblemParams(3, 0.0, "unit", 4.0)


def test_newtonian_ball_indicator():
    g = build_grid(FLAT, 400, "uniform")
    f = DiscreteFunction(g, (g.nodes <= 1.0 + 1e-12).astype(float))
    u = newtonian_radial(f, FLAT).values
    out = g.nodes > 1.0
    ru = u[out] * g.nodes[out]
    # exterior potential is exactly mass / r
    assert np.ptp(ru) <= 1e-14 * ru[0]
    assert ru[0] == pytest.approx(1 / 3, rel=0.02)
    assert np.all(u > 0) and np.all(np.diff(u[out]) < 0)


def test_newtonian_gaussian_quadrature_oracle():
    g = build_grid(FLAT, 2000, "uniform")
    f = DiscreteFunction(g, np.exp(-g.nodes**2))
    u = newtonian_radial(f, FLAT).values
    R = FLAT.R
    for i in (50, 300, 900, 1500):
        r = g.nodes[i]
        exact = quad(lambda s: math.exp(-s * s) * s * s, 0, r)[0] / r + quad(lambda s: math.exp(-s * s) * s, r, R)[0]
        assert u[i] == pytest.approx(exact, rel=1e-5)


def test_newtonian_inverts_laplacian():
    g = build_grid(FLAT, 800, "uniform")
    r = g.nodes
    f = DiscreteFunction(g, np.exp(-((r - 1.5) ** 2) * 4))
    u = newtonian_radial(f, FLAT).values
    # u(R) != 0, so compare -S(u - u(R)) with f away from the ends
    op = assemble_mode_operator(FLAT, g, 0)
    lap = op.matvec((u - u[-1])[:-1])
    inner = slice(20, 700)
    assert np.max(np.abs(-lap[inner] - f.values[inner])) <= 1e-3


def test_eigenfunction_fixed_point():
    p = ProblemParams(3, 4.0, "unit", 1e4)
    g = build_grid(p, 800)
    gs = ground_state(solve_modes(p, g, 0, n_per_mode=3))
    f = DiscreteFunction(g, gs.phi.values / weight_value(p, g.nodes))
    u = -gs.lam * newtonian_radial(f, p).values
    assert np.max(np.abs(u - gs.phi.values)) / np.max(gs.phi.values) <= 5e-3


def test_jparams_validation():
    with pytest.raises(ValueError):
        JParams(3.0, 2.0, 3)
    with pytest.raises(ValueError):
        JParams(1.0, 1.5, 3)
    with pytest.raises(ValueError):
        JParams(1.0, -1.0, 3)
    assert JParams(1.0, 2.5).regime == "power"
    assert JParams(1.0, 3.0).regime == "log"
    assert JParams(1.0, 4.0).regime == "decay"
    assert JParams(1.0, 2.5).exponent == pytest.approx(-0.5)


def test_j_at_origin_closed_form():
    jp = JParams(1.0, 4.0)
    # J(0) = |S^2| int_0^inf s / (1 + s^4) ds = 4 pi * pi / 4
    assert j_integral(0.0, jp) == pytest.approx(math.pi**2, rel=1e-8)
    assert j_tail(jp, 1e6) == pytest.approx(4 * math.pi * 1e-12 / 2)


RADII = np.geomspace(1e2, 1e4, 7)


def test_j_regime_decay():
    jp = JParams(1.0, 4.0)
    assert abs(fit_j_exponent(RADII, jp) - (-1.0)) < 0.1
    c3 = [j_integral(x, jp) * x for x in RADII]
    assert np.ptp(c3) / np.mean(c3) < 0.01


def test_j_regime_power():
    jp = JParams(1.0, 2.5)
    assert abs(fit_j_exponent(RADII, jp) - (3 - 3.5)) < 0.1


def test_j_regime_log():
    jp = JParams(1.0, 3.0)
    assert abs(fit_j_exponent(RADII, jp, log_corrected=True) - (-1.0)) < 0.1
    c2 = np.array([j_integral(x, jp) * x / math.log(x) for x in RADII])
    assert 0.5 * c2.max() < c2.min()


def test_j_bounded():
    jp = JParams(1.0, 4.0)
    r = np.geomspace(1e-3, 1e4, 30)
    J = np.array([j_integral(x, jp) for x in r])
    assert np.all(np.isfinite(J))
    k = int(np.argmax(J))
    assert 0 < k < len(r) - 1 or r[k] < 1.0


def test_j_csv():
    lines = j_csv([10.0, 100.0], JParams(1.0, 4.0)).splitlines()
    assert lines[0] == "x_radius,J,fitted_regime"
    assert lines[1].endswith(",decay")


def test_iteration_plan_examples():
    p = iteration_plan(4.0, 3)
    assert p.k == 2 and p.final_exponent == -1.0
    assert p.capped_sequence == (-1.0, -1.0)
    p = iteration_plan(7.0, 3)
    assert p.k == 1 and p.exponent_sequence == (-1.0,)
    p = iteration_plan(3.0, 5)
    assert p.k == 6
    assert p.capped_sequence[:3] == (-1.0, -2.0, -3.0) and p.final_exponent == -3.0
    for a in (2.5, 3.0, 5.0, 9.0):
        for N in (3, 4, 6):
            plan = iteration_plan(a, N)
            assert plan.k >= 1 and plan.final_exponent == 2 - N
            assert all(x >= 2 - N for x in plan.capped_sequence)
    with pytest.raises(ValueError):
        iteration_plan(2.0, 3)

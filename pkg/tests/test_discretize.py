import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal
from scipy.special import gamma

from degenheat.discretize import (
    DiscreteFunction,
    Grading,
    assemble_mode_operator,
    build_grid,
    dirichlet_form,
    inner_mu,
)
from degenheat.inequalities import spline_family
from degenheat.model import ProblemParams, sphere_area


def test_uniform_grid_example():
    g = build_grid(1.0, 16, "uniform")
    assert np.allclose(g.nodes, np.arange(1, 17) / 16, atol=0, rtol=1e-15)


def test_geometric_grid_example():
    g = build_grid(64.0, 512, "geometric:r1=1e-3")
    assert g.nodes[0] == pytest.approx(1e-3)
    assert g.nodes[-1] == 64.0
    q = g.nodes[1:] / g.nodes[:-1]
    assert np.allclose(q, q[0], rtol=1e-10)


def test_grading_validation():
    with pytest.raises(ValueError):
        build_grid(1.0, 64, "geometric:q=1.0")
    with pytest.raises(ValueError):
        build_grid(1.0, 8, "uniform")
    with pytest.raises(ValueError):
        build_grid(-1.0, 64, "uniform")
    with pytest.raises(ValueError):
        Grading.parse("spiral")


@pytest.mark.parametrize("grading", ["uniform", "piecewise", "geometric:r1=1e-4", "geometric:q=1.02"])
@pytest.mark.parametrize("R", [1.0, 64.0, 1e4])
def test_grid_invariants(grading, R):
    g = build_grid(R, 300, grading)
    assert g.nodes[0] > 0 and g.nodes[-1] == R
    assert np.all(np.diff(g.nodes) > 0)
    assert np.all(g.weights > 0)
    assert g.weights.sum() == pytest.approx(R - g.nodes[0], rel=1e-12)
    assert Grading.parse(str(g.grading)) == g.grading


def test_piecewise_places_quarter_in_unit_ball():
    g = build_grid(1e4, 400, "piecewise")
    assert np.sum(g.nodes <= 1.0) >= 100


def test_operator_symmetry_and_control_case():
    p = ProblemParams(3, 0.0, "unit", 1.0)
    g = build_grid(p, 800, "uniform")
    op = assemble_mode_operator(p, g, 0)
    D = op.dense()
    assert np.max(np.abs(D - D.T)) == 0.0
    lam = eigh_tridiagonal(op.diag, op.offdiag, eigvals_only=True)[::-1]
    k = np.arange(1, 6)
    assert np.allclose(lam[:5], -((k * np.pi) ** 2), rtol=1e-3)
    assert lam[0] == pytest.approx(-np.pi**2, rel=1e-5)


def test_control_convergence_order():
    p = ProblemParams(3, 0.0, "unit", 1.0)
    errs = []
    for n in (128, 256, 512):
        op = assemble_mode_operator(p, build_grid(p, n, "uniform"), 0)
        lam = eigh_tridiagonal(op.diag, op.offdiag, eigvals_only=True)[::-1][:5]
        errs.append(np.abs(lam + (np.arange(1, 6) * np.pi) ** 2))
    order = np.log2(np.array(errs[1]) / np.array(errs[2]))
    assert np.all((order > 1.7) & (order < 2.3))


def test_inner_mu_examples():
    p = ProblemParams(3, 2.0, "unit", 5.0)
    g = build_grid(p, 4000, "uniform")
    op = assemble_mode_operator(p, g, 0)
    one = DiscreteFunction(g, np.ones(g.n))
    exact = sphere_area(3) * (5.0 - math.atan(5.0))
    assert inner_mu(one, one, op) == pytest.approx(exact, rel=1e-5)
    e = np.zeros(g.n)
    e[7] = 3.0
    hat = DiscreteFunction(g, e)
    assert inner_mu(hat, hat, op) == pytest.approx(9.0 * op.mu_weights[7])
    rng = np.random.default_rng(0)
    u = DiscreteFunction(g, rng.normal(size=g.n))
    v = DiscreteFunction(g, rng.normal(size=g.n))
    assert inner_mu(2.0 * u, v, op) == pytest.approx(2.0 * inner_mu(u, v, op), rel=1e-14)
    other = build_grid(p, 100, "uniform")
    with pytest.raises(ValueError):
        inner_mu(DiscreteFunction(other, np.ones(100)), one, op)


def test_dirichlet_form_tent_uniform():
    p = ProblemParams(3, 0.0, "unit", 1.0)
    g = build_grid(p, 16, "uniform")
    u = np.maximum(0.0, 1.0 - np.abs(g.nodes - 0.5) / 0.25)
    f = DiscreteFunction(g, u)
    # slope +-4 on [0.25, 0.75]; midpoint rule of 4 pi int u'^2 r^2 dr
    h = 1.0 / 16
    mids = np.arange(0.25 + h / 2, 0.75, h)
    expected = 4 * np.pi * np.sum(16.0 * mids**2 * h)
    assert dirichlet_form(f, f, g, p) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        dirichlet_form(DiscreteFunction(g, np.ones(16)), f, g, p)


@pytest.mark.parametrize("ell", [0, 1, 3])
@pytest.mark.parametrize("alpha", [0.0, 2.5, 4.0])
def test_green_identity(ell, alpha):
    p = ProblemParams(3, alpha, "smooth-bounded", 20.0)
    g = build_grid(p, 300)
    op = assemble_mode_operator(p, g, ell)
    rng = np.random.default_rng(ell)
    for _ in range(5):
        u = np.append(rng.normal(size=g.n - 1), 0.0)
        v = np.append(rng.normal(size=g.n - 1), 0.0)
        fu, fv = DiscreteFunction(g, u, ell), DiscreteFunction(g, v, ell)
        a = dirichlet_form(fu, fv, g, p)
        Su = np.append(op.matvec(u[:-1]), 0.0)
        s = inner_mu(DiscreteFunction(g, Su, ell), fv, op)
        assert abs(a + s) <= 1e-10 * abs(a)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), ell=st.integers(0, 5))
def test_form_positive(seed, ell):
    p = ProblemParams(3, 3.0, "unit", 10.0)
    g = build_grid(p, 64)
    u = np.append(np.random.default_rng(seed).normal(size=g.n - 1), 0.0)
    f = DiscreteFunction(g, u, ell)
    assert dirichlet_form(f, f, g, p) > 0


def test_sobolev_sanity_talenti_constant():
    """||u||_6^2 <= S_3 a(u,u) with the sharp constant of Talenti/Aubin."""
    N = 3
    S_N = 1.0 / (math.pi * N * (N - 2)) * (gamma(N) / gamma(N / 2)) ** (2.0 / N)
    p = ProblemParams(N, 0.0, "unit", 16.0)
    g = build_grid(p, 4000, "uniform")
    ratios = []
    for u in spline_family(16.0, count=50, seed=7):
        vals = u.on(g.nodes)
        vals[-1] = 0.0
        f = DiscreteFunction(g, vals)
        l6 = (sphere_area(N) * np.sum(g.weights * np.abs(vals) ** 6 * g.nodes**2)) ** (1 / 3)
        ratios.append(l6 / dirichlet_form(f, f, g, p))
    assert max(ratios) <= 1.05 * S_N

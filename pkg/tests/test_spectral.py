import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import spherical_jn

from degenheat.discretize import DiscreteFunction, build_grid, inner_mu
from degenheat.model import ProblemParams
from degenheat.spectral import (
    InsufficientEigenvalues,
    counting,
    counting_curve,
    fit_decay,
    ground_state,
    harmonic_dimension,
    solve_below,
    solve_modes,
    sturm_counting,
    weyl_fit,
)


def _bessel_zeros(ell, kmax):
    """Zeros of j_ell on (0, kmax] by sign-change bracketing and bisection."""
    x = np.linspace(1e-6, kmax, 20000)
    f = spherical_jn(ell, x)
    idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    return [brentq(lambda s: spherical_jn(ell, s), x[i], x[i + 1], xtol=1e-14) for i in idx]


def _bessel_table(kmax, ell_cap=400):
    out = []
    for ell in range(ell_cap):
        z = _bessel_zeros(ell, kmax)
        if not z:
            break
        out += [(ell, zz) for zz in z]
    return out


def test_harmonic_dimension():
    assert [harmonic_dimension(l, 3) for l in range(5)] == [1, 3, 5, 7, 9]
    assert [harmonic_dimension(l, 4) for l in range(4)] == [1, 4, 9, 16]
    assert harmonic_dimension(3, 5) == 30


def test_control_counting_matches_bessel_zeros():
    p = ProblemParams(3, 0.0, "unit", 1.0)
    g = build_grid(p, 1200, "uniform")
    sp = solve_below(p, g, 2500.0)
    table = _bessel_table(50.5)
    zeros = np.array([z for _, z in table])
    # probe midway between consecutive distinct zeros so discretization error cannot flip the count
    z = np.unique(np.round(zeros, 9))
    mid, gap = 0.5 * (z[:-1] + z[1:]), np.diff(z)
    probes = mid[gap > 0.005 * mid][::20]
    assert len(probes) >= 5
    for k in probes:
        lam = k * k
        exact = sum(2 * l + 1 for l, z in table if z <= k)
        assert counting(sp, lam) == exact
        assert sturm_counting(p, g, lam) == exact


def test_control_eigenvalues_close_to_bessel(control_spectrum):
    for ell in range(4):
        z = _bessel_zeros(ell, 25.0)
        lam = control_spectrum.mode(ell).lams[: len(z)]
        assert np.allclose(lam, -np.square(z), rtol=2e-3)


def test_counting_edges(spectrum_a4):
    sp = spectrum_a4
    lam1 = abs(sp.eigenvalues[0])
    assert counting(sp, 0.0) == 0
    assert counting(sp, np.nextafter(lam1, 0)) == 0
    assert counting(sp, lam1) >= 1
    curve = counting_curve(sp, np.linspace(0, 50, 100))
    assert np.all(np.diff(curve) >= 0)
    with pytest.raises(ValueError):
        counting(sp, -1.0)


@pytest.mark.parametrize("fixture", ["spectrum_a4", "spectrum_a3", "control_spectrum"])
def test_orthogonality_and_residuals(fixture, request):
    sp = request.getfixturevalue(fixture)
    for ms in sp.modes[:5]:
        k = min(ms.reliable_count, 40)
        P = ms.phis[:, :k]
        G = P.T @ (ms.op.mu_weights[:, None] * P)
        assert np.max(np.abs(G - np.eye(k))) <= 1e-8
        res = ms.residuals()[:k]
        assert np.all(res <= 1e-8 * np.maximum(np.abs(ms.lams[:k]), 1.0))


def test_mode_matches_eigenvalues_sorted(spectrum_a4):
    for ms in spectrum_a4.modes:
        assert np.all(np.diff(ms.lams) < 0)
        assert np.all(ms.lams < 0)
    ev = spectrum_a4.eigenvalues
    assert np.all(np.diff(ev) <= 0)


def test_ground_state_positive_and_simple(spectrum_a4):
    gs = ground_state(spectrum_a4)
    assert gs.lam < 0
    assert np.all(gs.phi.values[:-1] > 0)
    assert gs.lam - spectrum_a4.eigenvalues[1] > 0
    op = spectrum_a4.mode(0).op
    assert inner_mu(gs.phi, gs.phi, op) == pytest.approx(1.0, rel=1e-12)


def test_sign_convention(spectrum_a4):
    ms = spectrum_a4.mode(2)
    for j in range(5):
        v = ms.vectors[:, j]
        first_extremum = np.argmax(np.abs(v) >= 0.5 * np.max(np.abs(v)))
        assert v[first_extremum] > 0


def test_control_ground_state_shape(control_spectrum):
    gs = ground_state(control_spectrum)
    r = control_spectrum.grid.nodes
    shape = np.sin(np.pi * r) / r
    ratio = gs.phi.values[:-1] / shape[:-1]
    assert np.ptp(ratio) / ratio.mean() < 1e-3


def test_fit_decay_exact_power():
    r = np.geomspace(1e-2, 1e4, 800)
    fit = fit_decay((r, (1 + r) ** -1.0))
    assert fit.fitted_exponent == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_decay((r, (1 + r) ** -1.0), window=(0.5, 10.0))
    with pytest.raises(ValueError):
        fit_decay((r, -np.ones_like(r)))


@pytest.mark.parametrize("N,alpha", [(3, 4.0), (5, 6.0)])
def test_ground_state_decay_exponent(N, alpha):
    fits = []
    for R in (1e4, 2e4):
        p = ProblemParams(N, alpha, "unit", R)
        sp = solve_modes(p, build_grid(p, 1000), 0, n_per_mode=3)
        fits.append(fit_decay(ground_state(sp).phi).fitted_exponent)
    assert fits[0] == pytest.approx(2 - N, rel=0.05)
    assert abs(fits[1] - fits[0]) < 0.02 * abs(fits[0])


def test_lambda1_domain_monotone_and_converged():
    lams = []
    for R in (32.0, 64.0, 128.0, 4096.0, 8192.0):
        p = ProblemParams(3, 4.0, "unit", R)
        sp = solve_modes(p, build_grid(p, 1000), 2, n_per_mode=6)
        lams.append(sp.eigenvalues[:8])
    for a, b in zip(lams, lams[1:]):
        assert np.all(a <= b + 1e-10)
    assert abs(lams[-1][0] - lams[-2][0]) < 1e-3 * abs(lams[-1][0])


def test_weyl_control_slope():
    p = ProblemParams(3, 0.0, "unit", 1.0)
    sp = solve_below(p, build_grid(p, 800, "uniform"), 4.0e4)
    fit = weyl_fit(sp, min_count=500)
    assert fit.slope == pytest.approx(1.5, rel=0.1)
    with pytest.raises(InsufficientEigenvalues):
        weyl_fit(solve_modes(p, build_grid(p, 64, "uniform"), 1, n_per_mode=3))


def test_csv_export(control_spectrum):
    lines = control_spectrum.to_csv().splitlines()
    assert lines[0] == "ell,n,lambda,multiplicity"
    ell, n, lam, mult = lines[1].split(",")
    assert (ell, n, mult) == ("0", "1", "1")
    assert float(lam) == pytest.approx(-np.pi**2, rel=1e-4)


def test_driver_agreement(params_a4):
    g = build_grid(params_a4, 300)
    a = solve_modes(params_a4, g, 3, n_per_mode=20, driver="stemr")
    b = solve_modes(params_a4, g, 3, n_per_mode=20, driver="stebz")
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)

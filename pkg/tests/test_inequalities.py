import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degenheat.inequalities import (
    SOBOLEV_TUPLES_N3,
    SUITE_IDS,
    RateFunction,
    SobolevParameterError,
    annulus_bump,
    bump,
    critical_beta,
    hardy_constant,
    hardy_divergence,
    kernel_bound_shape,
    log_profile,
    nash_ratio,
    nash_theta,
    polynomial_bump,
    radial_integral,
    rate_pairing_check,
    rate_to_K,
    rate_to_K_numeric,
    run_suite,
    scaling_exponent,
    scaling_optimality,
    sobolev_violations,
    sobolev_weighted,
    spline_family,
    standard_family,
    tent,
    weighted_nash_phi,
)
from degenheat.model import ProblemParams

P33 = ProblemParams(3, 3.0, "unit", 16.0)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(1e-3, 1e3), k=st.integers(0, 5))
def test_degree_zero_homogeneity(c, k):
    u = standard_family(16.0)[k * 7]
    v = u.scaled(c)
    assert nash_ratio(v, P33) == pytest.approx(nash_ratio(u, P33), rel=1e-10)
    w = annulus_bump(0.5, 3.0)
    assert hardy_divergence(w.scaled(c), 2.0, 0.0) == pytest.approx(hardy_divergence(w, 2.0, 0.0), rel=1e-10)
    assert sobolev_weighted(w.scaled(c), *SOBOLEV_TUPLES_N3[2]) != pytest.approx(0.0)


def test_weighted_nash_homogeneity(spectrum_a3):
    u = annulus_bump(0.5, 4.0)
    a = weighted_nash_phi(u, spectrum_a3)
    b = weighted_nash_phi(u.scaled(7.5), spectrum_a3)
    # a~ = a + ||u||^2 mixes degrees only through the identity part of L + I
    assert math.isfinite(a) and a > 0
    assert b == pytest.approx(a, rel=1e-10)


def test_theta_examples():
    assert nash_theta(ProblemParams(3, 3.0, "unit", 1.0)) == 4.0
    assert nash_theta(ProblemParams(3, 4.0, "unit", 1.0)) == 3.0
    assert 2 + 4 / nash_theta(ProblemParams(3, 4.0, "unit", 1.0)) == pytest.approx(10 / 3)
    with pytest.raises(ValueError):
        nash_theta(ProblemParams(3, 2.0, "unit", 1.0))


def test_nash_ratio_bump_at_origin_refinement():
    u = bump(0.0, 1.0)
    a = nash_ratio(u, P33, n_panels=256)
    b = nash_ratio(u, P33, n_panels=1024)
    assert math.isfinite(a) and a == pytest.approx(b, rel=0.01)


def test_rate_to_K_examples():
    nash = RateFunction.nash(3)
    for t in (0.01, 0.3, 1.0, 7.0):
        assert nash.U(t) == pytest.approx(1.5 * t ** (-2 / 3))
        assert rate_to_K(nash, t) == pytest.approx((3 / (2 * t)) ** 0.75, rel=1e-13)
        assert rate_to_K_numeric(nash, t) == pytest.approx(rate_to_K(nash, t), rel=1e-10)
    sq = RateFunction(2.0)
    for t in (0.1, 2.0):
        assert rate_to_K(sq, t) == pytest.approx(t**-0.5, rel=1e-14)
        assert rate_to_K_numeric(sq, t) == pytest.approx(t**-0.5, rel=1e-10)
    for N, a in [(3, 3.0), (3, 4.0), (4, 6.0)]:
        psi = RateFunction.intrinsic(N, a)
        assert rate_to_K_numeric(psi, 0.2) == pytest.approx(rate_to_K(psi, 0.2), rel=1e-10)
    with pytest.raises(ValueError):
        RateFunction(1.0)
    with pytest.raises(ValueError):
        rate_to_K(sq, 0.0)


def test_kernel_bound_shape():
    psi = RateFunction.nash(3)
    val = kernel_bound_shape(psi, 0.4, 2.0, 3.0, c=0.5)
    assert val == pytest.approx(rate_to_K(psi, 0.2) ** 2 * math.exp(0.2) * 6.0)


def test_rate_pairing():
    chk = rate_pairing_check(3, 3.0)
    assert chk.target_time_power == pytest.approx(2.0)
    assert chk.matching == ("direct", "theta")


def test_sobolev_parameter_validation():
    for tup in SOBOLEV_TUPLES_N3:
        p, q, b, g, _ = tup
        assert sobolev_violations(3, p, q, b, g) == []
    # p = q = 2, beta = gamma - 1 is the Hardy-type specialization
    assert sobolev_violations(3, 2.0, 2.0, -1.0, 0.0) == []
    # p = 2, gamma = beta forces q = p* = 6
    assert sobolev_violations(3, 2.0, 6.0, 0.3, 0.3) == []
    assert "1/p - 1/q = (1-gamma+beta)/N" in sobolev_violations(3, 2.0, 5.0, 0.3, 0.3)
    assert "gamma-1 <= beta <= gamma" in sobolev_violations(3, 2.0, 2.0, 1.0, 0.0)
    assert "1 < p <= q < inf" in sobolev_violations(3, 2.0, 1.5, 0.0, 0.0)
    assert "p < N" in sobolev_violations(3, 3.0, 3.0, -1.0, 0.0)
    assert "N + p(gamma-1) != 0" in sobolev_violations(3, 2.0, 2.0, -1.5, -0.5)
    with pytest.raises(SobolevParameterError) as exc:
        sobolev_weighted(annulus_bump(1, 2), 2.0, 5.0, 0.3, 0.3, -3.0)
    assert exc.value.violations


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(1.01, 2.9),
    q=st.floats(1.01, 20.0),
    beta=st.floats(-2.0, 2.0),
    gamma=st.floats(-2.0, 2.0),
)
def test_sobolev_validation_is_total(p, q, beta, gamma):
    bad = sobolev_violations(3, p, q, beta, gamma)
    if bad:
        with pytest.raises(SobolevParameterError):
            sobolev_weighted(annulus_bump(1, 2), p, q, beta, gamma, -3.0)
    else:
        assert sobolev_weighted(annulus_bump(1, 2), p, q, beta, gamma, -3.0) > 0


def test_sobolev_dilation_sweep_bounded():
    u0 = annulus_bump(1.0, 2.0)
    for p, q, b, g, nu in SOBOLEV_TUPLES_N3:
        ratios = [sobolev_weighted(u0.dilate(2.0**k), p, q, b, g, nu) for k in range(-4, 5)]
        assert all(math.isfinite(x) and x > 0 for x in ratios)
        assert max(ratios) < 50.0


def _mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def _definite(p, a, b):
    return sum(c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(p))


def _hardy_oracle(a, b, s):
    """Exact rational antiderivatives of the monomial bump integrals."""
    a, b = Fraction(a), Fraction(b)
    u = [Fraction(0)] * s + [Fraction(1)]
    for factor in ([-a, 1], [-a, 1], [b, -1], [b, -1]):
        u = _mul(u, [Fraction(x) for x in factor])
    du = [k * c for k, c in enumerate(u)][1:]
    lhs = _definite(_mul(u, u), a, b)  # r^{-2} u^2 r^2
    rhs = _definite(_mul(_mul(du, du), [0, 0, 1]), a, b)
    return math.sqrt(lhs / rhs)


@pytest.mark.parametrize("a,b,s", [(0.5, 2.0, 0), (1.0, 3.0, 1), (0.1, 5.0, 2), (2.0, 2.5, 3)])
def test_hardy_monomial_oracle(a, b, s):
    assert hardy_divergence(polynomial_bump(a, b, s), 2.0, 0.0) == pytest.approx(_hardy_oracle(a, b, s), rel=1e-12)


def test_hardy_constant_and_extremals():
    assert hardy_constant(2.0, 0.0, 3) == 2.0
    ratios = [hardy_divergence(log_profile(10.0**-k, 10.0**k, -0.5), 2.0, 0.0, n_panels=512) for k in (1, 2, 3)]
    assert ratios[0] < ratios[1] < ratios[2] < 2.0
    u = annulus_bump(0.3, 2.0)
    assert hardy_divergence(u.dilate(3.0), 2.0, 0.0) == pytest.approx(hardy_divergence(u, 2.0, 0.0), rel=1e-9)
    with pytest.raises(ValueError):
        hardy_divergence(bump(0.0, 1.0), 2.0, 0.0)
    with pytest.raises(ValueError):
        hardy_divergence(u, 2.0, -0.5)


def test_scaling_optimality_alpha3():
    assert critical_beta(3, 3.0) == 2.0
    assert scaling_exponent(3, 3.0, 2.0) == 0.0
    assert scaling_exponent(3, 3.0, 1.0) == -1.0
    assert critical_beta(3, 4.0) == pytest.approx(1.5)
    for beta in (1.0, 2.0, 4.0):
        res = scaling_optimality(P33, beta)
        assert abs(res.empirical_slope - res.analytic_exponent) < 0.1
        assert res.blow_up == (beta < 2.0)
        assert res.blow_up_analytic == (beta < 2.0)
    with pytest.raises(ValueError):
        scaling_optimality(P33, 1.0, lambdas=[0.5, 1.0])
    with pytest.raises(ValueError):
        scaling_optimality(ProblemParams(3, 2.0, "unit", 1.0), 1.0)


def test_radial_integral_exact_polynomial():
    u = tent(2.0, 1.0)
    # |S^2| int_1^3 r^2 dr for the constant integrand
    val = radial_integral(u, lambda r, v, d: np.ones_like(r), 3)
    assert val == pytest.approx(4 * np.pi * (27 - 1) / 3, rel=1e-12)


def test_families_deterministic():
    a = spline_family(16.0, count=5, seed=3)
    b = spline_family(16.0, count=5, seed=3)
    r = np.linspace(0, 16, 200)
    for u, v in zip(a, b):
        assert np.array_equal(u.on(r), v.on(r))
        assert u.support[0] > 0 and u.support[1] <= 16.0


@pytest.mark.parametrize("suite", ["nash", "sobolev", "hardy", "scaling"])
def test_suites_pass(suite):
    reports = run_suite(suite, P33)
    assert reports
    for rep in reports:
        assert math.isfinite(rep.worst_ratio)
        assert rep.passed, rep
    if suite == "sobolev":
        assert len(reports) == 5
    if suite == "hardy":
        assert reports[0].worst_ratio <= 2.1


def test_weighted_nash_suite(spectrum_a3):
    (rep,) = run_suite("weighted-nash", spectrum_a3.params, spectrum_a3)
    assert rep.passed and rep.parameters["theta"] == 4.0
    assert rep.drift < 0.02
    with pytest.raises(ValueError):
        run_suite("weighted-nash", P33)
    with pytest.raises(ValueError):
        run_suite("nope", P33)
    assert set(SUITE_IDS) == {"nash", "weighted-nash", "sobolev", "hardy", "scaling"}

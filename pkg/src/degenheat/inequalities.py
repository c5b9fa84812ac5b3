"""Both sides of the functional inequalities on radial test-function families,
and the rate-function to ultracontractivity machinery.

All integrals are over R^N for radial functions: int g(|x|) dx =
|S^{N-1}| int_0^inf g(r) r^{N-1} dr, evaluated by composite Gauss-Legendre
quadrature on the (compact) support of the test function. Supports lie
inside the truncation ball, so no far-field tail is dropped and every
report carries ``tail_bound = 0``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from .model import ProblemParams, growth, nash_weight, sphere_area

DEFAULT_PANELS = 256
GL_ORDER = 8

Kind = Literal["bump", "tent", "dilated", "annulus", "spline", "polynomial", "log-profile"]


# ---------------------------------------------------------------- test functions


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Radial test function u(|x|) with compact support [a, b].

    ``value`` and ``deriv`` are vectorized callables in r; ``breaks`` lists
    points where u is less smooth (panel boundaries for the quadrature).
    """

    __test__ = False  # keep pytest from collecting this class

    kind: Kind
    support: tuple[float, float]
    value: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    deriv: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: dict = field(default_factory=dict)
    breaks: tuple[float, ...] = ()

    def scaled(self, c: float) -> "TestFunction":
        return TestFunction(
            self.kind, self.support, lambda r: c * self.value(r), lambda r: c * self.deriv(r), {**self.params, "scale": c}, self.breaks
        )

    def dilate(self, lam: float) -> "TestFunction":
        """u(lam * x)."""
        if not lam > 0:
            raise ValueError("dilation must be positive")
        a, b = self.support
        return TestFunction(
            "dilated",
            (a / lam, b / lam),
            lambda r: self.value(lam * np.asarray(r)),
            lambda r: lam * self.deriv(lam * np.asarray(r)),
            {**self.params, "dilation": lam, "base": self.kind},
            tuple(x / lam for x in self.breaks),
        )

    def on(self, nodes) -> np.ndarray:
        return self.value(np.asarray(nodes, dtype=float))


def bump(center: float, width: float) -> TestFunction:
    """exp(1 - 1/(1 - z^2)), z = (r - center)/width; smooth, peak 1."""
    if not width > 0:
        raise ValueError("width must be positive")
    if center - width < 0 and center != 0:
        raise ValueError("support must lie in [0, inf); use center 0 for a bump at the origin")

    def val(r):
        z = (np.asarray(r, float) - center) / width
        out = np.zeros_like(z)
        m = np.abs(z) < 1
        out[m] = np.exp(1.0 - 1.0 / (1.0 - z[m] ** 2))
        return out

    def der(r):
        z = (np.asarray(r, float) - center) / width
        out = np.zeros_like(z)
        m = np.abs(z) < 1
        zm = z[m]
        out[m] = np.exp(1.0 - 1.0 / (1.0 - zm**2)) * (-2.0 * zm / (1.0 - zm**2) ** 2) / width
        return out

    lo = max(center - width, 0.0)
    kind = "bump" if lo == 0 else "annulus"
    return TestFunction(kind, (lo, center + width), val, der, {"center": center, "width": width}, (center,))


def annulus_bump(a: float, b: float) -> TestFunction:
    if not 0 < a < b:
        raise ValueError("annulus needs 0 < a < b")
    f = bump(0.5 * (a + b), 0.5 * (b - a))
    return TestFunction("annulus", (a, b), f.value, f.deriv, {"a": a, "b": b}, f.breaks)


def tent(center: float, width: float) -> TestFunction:
    if not (width > 0 and center - width >= 0):
        raise ValueError("tent support must lie in [0, inf)")

    def val(r):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(r, float) - center) / width)

    def der(r):
        r = np.asarray(r, float)
        inside = np.abs(r - center) < width
        return np.where(inside, -np.sign(r - center) / width, 0.0)

    return TestFunction("tent", (center - width, center + width), val, der, {"center": center, "width": width}, (center,))


def random_spline(rng: np.random.Generator, r_lo: float = 0.05, r_hi: float = 16.0) -> TestFunction:
    """Clamped cubic spline vanishing with its slope at both ends of a random annulus."""
    a = float(np.exp(rng.uniform(np.log(r_lo), np.log(r_hi / 4))))
    b = float(min(a * rng.uniform(1.5, 8.0), r_hi))
    k = int(rng.integers(4, 9))
    x = np.linspace(a, b, k + 2)
    y = np.concatenate(([0.0], rng.normal(size=k), [0.0]))
    cs = CubicSpline(x, y, bc_type="clamped")
    d = cs.derivative()

    def val(r):
        r = np.asarray(r, float)
        return np.where((r > a) & (r < b), cs(np.clip(r, a, b)), 0.0)

    def der(r):
        r = np.asarray(r, float)
        return np.where((r > a) & (r < b), d(np.clip(r, a, b)), 0.0)

    return TestFunction("spline", (a, b), val, der, {"knots": x.tolist(), "values": y.tolist()}, tuple(x[1:-1]))


def polynomial_bump(a: float, b: float, s: int = 0) -> TestFunction:
    """r^s (r - a)^2 (b - r)^2 on [a, b]; integrals of its squares are polynomial."""
    P = np.polynomial.Polynomial
    poly = P([0.0] * s + [1.0]) * P([-a, 1.0]) ** 2 * P([b, -1.0]) ** 2
    dp = poly.deriv()

    def val(r):
        r = np.asarray(r, float)
        return np.where((r >= a) & (r <= b), poly(r), 0.0)

    def der(r):
        r = np.asarray(r, float)
        return np.where((r >= a) & (r <= b), dp(r), 0.0)

    return TestFunction("polynomial", (a, b), val, der, {"a": a, "b": b, "s": s, "coef": poly.coef.tolist()})


def log_profile(a: float, b: float, s: float, pieces: int = 60) -> TestFunction:
    """r^s sin(pi log(r/a)/log(b/a)) on [a, b].

    For s = -(N + p(gamma-1))/p these approach the Hardy extremal r^s as
    b/a grows, so the Hardy ratio tends to the sharp constant from below.
    """
    if not 0 < a < b:
        raise ValueError("log profile needs 0 < a < b")
    L = math.log(b / a)

    def val(r):
        r = np.asarray(r, float)
        z = np.log(np.clip(r, a, b) / a) / L
        return np.where((r > a) & (r < b), np.clip(r, a, b) ** s * np.sin(np.pi * z), 0.0)

    def der(r):
        r = np.asarray(r, float)
        rc = np.clip(r, a, b)
        z = np.log(rc / a) / L
        d = s * rc ** (s - 1) * np.sin(np.pi * z) + rc ** (s - 1) * np.cos(np.pi * z) * np.pi / L
        return np.where((r > a) & (r < b), d, 0.0)

    return TestFunction("log-profile", (a, b), val, der, {"a": a, "b": b, "s": s}, tuple(np.geomspace(a, b, pieces)[1:-1]))


def bump_family(R: float, count: int = 24, seed: int = 42, away_from_origin: bool = False) -> list[TestFunction]:
    """Bumps with log-spaced centers and widths inside (0, R/2]."""
    rng = np.random.default_rng(seed)
    out = []
    centers = np.geomspace(0.05, R / 4, count)
    for c in centers:
        w = float(c * np.exp(rng.uniform(np.log(0.1), np.log(0.9))))
        out.append(annulus_bump(c - w, c + w))
    if not away_from_origin:
        for w in np.geomspace(0.1, R / 4, 6):
            out.append(bump(0.0, float(w)))
    return out


def tent_family(R: float, count: int = 8) -> list[TestFunction]:
    return [tent(float(c), float(0.5 * c)) for c in np.geomspace(0.1, R / 4, count)]


def spline_family(R: float, count: int = 100, seed: int = 42) -> list[TestFunction]:
    rng = np.random.default_rng(seed)
    return [random_spline(rng, 0.05, R / 2) for _ in range(count)]


def standard_family(R: float, seed: int = 42, away_from_origin: bool = False) -> list[TestFunction]:
    return bump_family(R, seed=seed, away_from_origin=away_from_origin) + tent_family(R) + spline_family(R, seed=seed)


# ---------------------------------------------------------------- quadrature


def _nodes(u: TestFunction, n_panels: int):
    a, b = u.support
    pts = sorted({a, b, *[x for x in u.breaks if a < x < b]})
    L = b - a
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    x, w = 0.5 * (x + 1), 0.5 * w
    rs, ws = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        k = max(1, int(round(n_panels * (hi - lo) / L)))
        e = np.linspace(lo, hi, k + 1)
        h = np.diff(e)[:, None]
        rs.append((e[:-1, None] + h * x).ravel())
        ws.append((h * w).ravel())
    return np.concatenate(rs), np.concatenate(ws)


def radial_integral(u: TestFunction, integrand: Callable, dim: int, n_panels: int = DEFAULT_PANELS) -> float:
    """|S^{N-1}| int integrand(r, u, u') r^{N-1} dr over the support of u."""
    r, w = _nodes(u, n_panels)
    return sphere_area(dim) * float(np.dot(w, integrand(r, u.value(r), u.deriv(r)) * r ** (dim - 1)))


def _mu_factor(params: ProblemParams, r):
    return 1.0 / (params.m(r) * growth(params, r))


def dirichlet_energy(u: TestFunction, dim: int, n_panels: int = DEFAULT_PANELS) -> float:
    """a(u, u) = int |grad u|^2 dx."""
    return radial_integral(u, lambda r, v, d: d * d, dim, n_panels)


def _nonzero(x: float, what: str) -> float:
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"{what} must be positive and finite (got {x})")
    return x


# ---------------------------------------------------------------- inequalities


def nash_ratio(u: TestFunction, params: ProblemParams, n_panels: int = DEFAULT_PANELS) -> float:
    """(int u^2 dmu)^{1+2/N} / (a(u,u) (int |u| V dmu)^{4/N}), V = (1+r^alpha)^{(2-N)/4}."""
    N = params.dim
    l2 = _nonzero(radial_integral(u, lambda r, v, d: v * v * _mu_factor(params, r), N, n_panels), "||u||_2")
    l1 = _nonzero(
        radial_integral(u, lambda r, v, d: np.abs(v) * nash_weight(params, r) * _mu_factor(params, r), N, n_panels), "||uV||_1"
    )
    a = _nonzero(dirichlet_energy(u, N, n_panels), "a(u,u)")
    return l2 ** (1 + 2 / N) / (a * l1 ** (4 / N))


def nash_theta(params: ProblemParams) -> float:
    a, N = params.alpha, params.dim
    if not a > 2:
        raise ValueError("theta needs alpha > 2")
    return 2.0 * (N + a - 4.0) / (a - 2.0)


def ground_state_callable(spectrum) -> Callable:
    """Monotone cubic interpolant of the ground state on [0, R] (zero beyond)."""
    from .spectral import ground_state

    gs = ground_state(spectrum)
    r = spectrum.grid.nodes
    v = gs.phi.values
    r1, r2 = r[0] ** 2, r[1] ** 2
    v0 = (r2 * v[0] - r1 * v[1]) / (r2 - r1)
    f = PchipInterpolator(np.concatenate(([0.0], r)), np.concatenate(([v0], v)), extrapolate=False)
    R = r[-1]

    def phi(x):
        x = np.asarray(x, float)
        return np.where(x <= R, np.nan_to_num(f(np.minimum(x, R))), 0.0)

    return phi


def weighted_nash_phi(u: TestFunction, spectrum, params: ProblemParams | None = None, n_panels: int = DEFAULT_PANELS, phi=None) -> float:
    """||u||_{L2mu}^{2+4/theta} / (a~(u,u) ||u phi||_{L1mu}^{4/theta}), a~ = a + ||u||^2."""
    params = spectrum.params if params is None else params
    N = params.dim
    theta = nash_theta(params)
    if u.support[1] > spectrum.grid.R:
        raise ValueError("test function support exceeds the spectral domain")
    phi = ground_state_callable(spectrum) if phi is None else phi
    l2 = _nonzero(radial_integral(u, lambda r, v, d: v * v * _mu_factor(params, r), N, n_panels), "||u||_2")
    l1 = _nonzero(radial_integral(u, lambda r, v, d: np.abs(v) * phi(r) * _mu_factor(params, r), N, n_panels), "||u phi||_1")
    at = dirichlet_energy(u, N, n_panels) + l2
    return math.sqrt(l2) ** (2 + 4 / theta) / (at * l1 ** (4 / theta))


# ---------------------------------------------------------------- rate functions


@dataclass(frozen=True)
class RateFunction:
    """psi(t) = t^exponent with exponent > 1."""

    exponent: float
    label: str = "power"

    def __post_init__(self):
        if not self.exponent > 1:
            raise ValueError("rate exponent must exceed 1 so that psi(x)/x increases")

    @classmethod
    def nash(cls, N: int) -> "RateFunction":
        return cls(1.0 + 2.0 / N, "nash")

    @classmethod
    def intrinsic(cls, N: int, alpha: float) -> "RateFunction":
        if not alpha > 2:
            raise ValueError("intrinsic rate needs alpha > 2")
        return cls(1.0 + (alpha - 2.0) / (N + alpha - 4.0), "intrinsic")

    def __call__(self, t):
        return np.asarray(t, float) ** self.exponent

    def U(self, t: float) -> float:
        p = self.exponent
        return t ** (1.0 - p) / (p - 1.0)

    def U_inv(self, s: float) -> float:
        p = self.exponent
        return ((p - 1.0) * s) ** (-1.0 / (p - 1.0))

    @property
    def time_power(self) -> float:
        """K(t)^2 = U^{-1}(t) behaves like t^{-time_power}."""
        return 1.0 / (self.exponent - 1.0)


def rate_to_K(psi: RateFunction, t: float) -> float:
    """K(t) = sqrt(U^{-1}(t)) with U(t) = int_t^inf du / psi(u), analytic for powers."""
    if not t > 0:
        raise ValueError("t must be positive")
    return math.sqrt(psi.U_inv(t))


def rate_to_K_numeric(psi: RateFunction, t: float) -> float:
    """Same as :func:`rate_to_K` with U by quadrature and U^{-1} by root finding."""
    if not t > 0:
        raise ValueError("t must be positive")
    p = psi.exponent

    def U(x):
        # v = x e^s turns the algebraic tail into an exponential one
        # and the range s <= 40/(p-1) leaves a relative tail below e^-40
        s_max = 40.0 / (p - 1.0)
        val, _ = quad(lambda s: x * math.exp(s) / float(psi(x * math.exp(s))), 0.0, s_max, epsabs=0.0, epsrel=1e-13, limit=400)
        return val

    # U is decreasing in x: solve log U(x) = log t in log x
    g = lambda lx: math.log(U(math.exp(lx))) - math.log(t)
    guess = math.log(psi.U_inv(t))
    lo, hi = guess - 5.0, guess + 5.0
    while g(lo) < 0:
        lo -= 5.0
    while g(hi) > 0:
        hi += 5.0
    lx = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.sqrt(math.exp(lx))


def kernel_bound_shape(psi: RateFunction, t: float, Vx, Vy, c: float = 0.0):
    """K(t/2)^2 e^{ct} V(x) V(y): the product bound delivered by the machinery."""
    return rate_to_K(psi, 0.5 * t) ** 2 * math.exp(c * t) * np.asarray(Vx) * np.asarray(Vy)


@dataclass(frozen=True)
class PairingCheck:
    N: int
    alpha: float
    target_time_power: float
    candidates: dict
    matching: tuple[str, ...]


def rate_pairing_check(N: int, alpha: float) -> PairingCheck:
    """Compare the time power produced by both readings of the second rate exponent.

    Reading "direct": psi(t) = t^{1+(alpha-2)/(N+alpha-4)}.
    Reading "inverted": psi(t) = t^{1+(N+alpha-4)/(alpha-2)}.
    The weighted Nash inequality with theta = 2(N+alpha-4)/(alpha-2) corresponds
    to psi(t) = t^{1+2/theta}; the reading whose time power equals
    (N+alpha-4)/(alpha-2) is reported as matching.
    """
    target = (N + alpha - 4.0) / (alpha - 2.0)
    theta = 2.0 * target
    cands = {
        "direct": RateFunction(1.0 + (alpha - 2.0) / (N + alpha - 4.0)).time_power,
        "inverted": RateFunction(1.0 + (N + alpha - 4.0) / (alpha - 2.0)).time_power,
        "theta": RateFunction(1.0 + 2.0 / theta).time_power,
    }
    match = tuple(k for k, v in cands.items() if abs(v - target) <= 1e-12 * max(1.0, target))
    return PairingCheck(N, alpha, target, cands, match)


# ---------------------------------------------------------------- weighted Sobolev


class SobolevParameterError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def sobolev_violations(N: int, p: float, q: float, beta: float, gamma: float) -> list[str]:
    """Every violated hypothesis of the weighted Sobolev inequality, by name."""
    out = []
    if not (gamma - 1 <= beta + 1e-12 and beta <= gamma + 1e-12):
        out.append("gamma-1 <= beta <= gamma")
    if not (1 < p <= q < math.inf):
        out.append("1 < p <= q < inf")
    if not p < N:
        out.append("p < N")
    if abs((1 / p - 1 / q) - (1 - gamma + beta) / N) > 1e-12:
        out.append("1/p - 1/q = (1-gamma+beta)/N")
    if abs(N + p * (gamma - 1)) <= 1e-12:
        out.append("N + p(gamma-1) != 0")
    if p < N and q > N * p / (N - p) + 1e-12:
        out.append("q <= p* = Np/(N-p)")
    return out


def sobolev_weighted(u: TestFunction, p: float, q: float, beta: float, gamma: float, nu: float, dim: int = 3, n_panels: int = DEFAULT_PANELS) -> float:
    """(int (1+r)^{q beta}|u|^q)^{1/q} / [(int (1+r)^{gamma p}|u'|^p)^{1/p} + (int (1+r)^nu |u|^p)^{1/p}]."""
    bad = sobolev_violations(dim, p, q, beta, gamma)
    if bad:
        raise SobolevParameterError(bad)
    lhs = radial_integral(u, lambda r, v, d: (1 + r) ** (q * beta) * np.abs(v) ** q, dim, n_panels) ** (1 / q)
    g = radial_integral(u, lambda r, v, d: (1 + r) ** (gamma * p) * np.abs(d) ** p, dim, n_panels) ** (1 / p)
    z = radial_integral(u, lambda r, v, d: (1 + r) ** nu * np.abs(v) ** p, dim, n_panels) ** (1 / p)
    return _nonzero(lhs, "LHS") / _nonzero(g + z, "RHS")


# (p, q, beta, gamma, nu) admissible tuples for N = 3; the first is the one
# used for the weighted Nash inequality with alpha = 3.
SOBOLEV_TUPLES_N3 = (
    (2.0, 4.0, -0.25, 0.0, -3.0),
    (2.0, 2.0, -1.0, 0.0, -3.0),
    (2.0, 6.0, 0.0, 0.0, -3.0),
    (2.0, 6.0, 0.5, 0.5, -3.0),
    (1.5, 3.0, 0.25, 0.25, -3.0),
)


def hardy_divergence(u: TestFunction, p: float, gamma: float, dim: int = 3, n_panels: int = DEFAULT_PANELS) -> float:
    """(int |x|^{(gamma-1)p}|u|^p)^{1/p} / (int |x|^{gamma p}|grad u|^p)^{1/p}."""
    if not u.support[0] > 0:
        raise ValueError("support must stay away from the origin")
    if abs(dim + p * (gamma - 1)) <= 1e-12:
        raise ValueError("N + p(gamma-1) must be nonzero")
    lhs = radial_integral(u, lambda r, v, d: r ** ((gamma - 1) * p) * np.abs(v) ** p, dim, n_panels)
    rhs = radial_integral(u, lambda r, v, d: r ** (gamma * p) * np.abs(d) ** p, dim, n_panels)
    return _nonzero(lhs, "LHS") ** (1 / p) / _nonzero(rhs, "RHS") ** (1 / p)


def hardy_constant(p: float, gamma: float, dim: int) -> float:
    """p / |N + p(gamma-1)|."""
    return p / abs(dim + p * (gamma - 1))


# ---------------------------------------------------------------- scaling


@dataclass(frozen=True)
class ScalingResult:
    beta: float
    analytic_exponent: float
    empirical_slope: float
    lambdas: np.ndarray
    ratios: np.ndarray
    blow_up: bool
    blow_up_analytic: bool


def scaling_exponent(N: int, alpha: float, beta: float) -> float:
    return alpha - 2.0 + (4.0 - N - alpha) / beta


def critical_beta(N: int, alpha: float) -> float:
    return (N + alpha - 4.0) / (alpha - 2.0)


def nash2_ratio(u: TestFunction, params: ProblemParams, beta: float, n_panels: int = DEFAULT_PANELS) -> float:
    """(int u^2 dmu)^{1+1/beta} / (a(u,u) (int |u|(1+r)^{2-N} dmu)^{2/beta})."""
    N = params.dim
    l2 = _nonzero(radial_integral(u, lambda r, v, d: v * v * _mu_factor(params, r), N, n_panels), "||u||_2")
    l1 = _nonzero(
        radial_integral(u, lambda r, v, d: np.abs(v) * (1 + r) ** (2 - N) * _mu_factor(params, r), N, n_panels), "||u w||_1"
    )
    a = _nonzero(dirichlet_energy(u, N, n_panels), "a(u,u)")
    return l2 ** (1 + 1 / beta) / (a * l1 ** (2 / beta))


def scaling_optimality(
    params: ProblemParams,
    beta: float,
    u0: TestFunction | None = None,
    lambdas: Sequence[float] | None = None,
    fit_below: float = 2.0**-4,
    blow_up_tol: float = 0.05,
) -> ScalingResult:
    """Ratio of the two sides on u0(lam x) as lam decreases to 0.

    The slope of log ratio against log lam over lam <= ``fit_below`` is the
    empirical exponent; it should match alpha - 2 + (4-N-alpha)/beta.
    Blow-up is flagged when the empirical slope is below -``blow_up_tol``.
    """
    if not params.alpha > 2:
        raise ValueError("scaling optimality needs alpha > 2")
    if not beta > 0:
        raise ValueError("beta must be positive")
    u0 = annulus_bump(1.0, 2.0) if u0 is None else u0
    lams = np.array([2.0**-k for k in range(0, 9)] if lambdas is None else lambdas, dtype=float)
    if np.any(np.diff(lams) >= 0) or np.any(lams <= 0):
        raise ValueError("lambdas must be positive and strictly decreasing toward 0")
    ratios = np.array([nash2_ratio(u0.dilate(l), params, beta) for l in lams])
    sel = lams <= fit_below * (1 + 1e-12)
    if sel.sum() < 2:
        raise ValueError("need at least two dilations below the fit threshold")
    slope = float(np.polyfit(np.log(lams[sel]), np.log(ratios[sel]), 1)[0])
    e = scaling_exponent(params.dim, params.alpha, beta)
    return ScalingResult(beta, e, slope, lams, ratios, slope < -blow_up_tol, e < 0)


# ---------------------------------------------------------------- reports


@dataclass
class InequalityReport:
    inequality_id: str
    family_size: int
    worst_ratio: float
    parameters: dict
    passed: bool
    refined_worst_ratio: float | None = None
    drift: float | None = None
    tail_bound: float = 0.0
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def family_report(
    inequality_id: str,
    fn: Callable[[TestFunction, int], float],
    family: Sequence[TestFunction],
    parameters: dict,
    n_panels: int = DEFAULT_PANELS,
    drift_tol: float = 0.02,
    bound: float | None = None,
) -> InequalityReport:
    """Worst ratio over ``family`` at ``n_panels`` and at twice that, with drift."""
    w1 = max(fn(u, n_panels) for u in family)
    w2 = max(fn(u, 2 * n_panels) for u in family)
    drift = abs(w2 - w1) / abs(w1)
    ok = math.isfinite(w1) and math.isfinite(w2) and drift < drift_tol
    note = "constant fitted as the family supremum; stability under refinement required"
    if bound is not None:
        ok = ok and w2 <= bound
        note += f"; compared against {bound:g}"
    return InequalityReport(inequality_id, len(family), float(w1), dict(parameters), bool(ok), float(w2), float(drift), 0.0, note)


def reports_to_json(reports: Sequence[InequalityReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


# ---------------------------------------------------------------- suites

SUITE_IDS = ("nash", "weighted-nash", "sobolev", "hardy", "scaling")
FAMILY_RADIUS = 16.0


def run_suite(suite_id: str, params: ProblemParams, spectrum=None, seed: int = 42, n_panels: int = DEFAULT_PANELS) -> list[InequalityReport]:
    """Run one named inequality suite on the standard test families.

    ``weighted-nash`` needs a spectrum (for the ground state) and alpha > 2;
    ``scaling`` needs alpha > 2 and sweeps beta over {beta*/2, beta*, 2 beta*}.
    """
    N = params.dim
    snap = params.snapshot()
    R = FAMILY_RADIUS
    if suite_id == "nash":
        fam = standard_family(R, seed)
        return [family_report("nash", lambda u, n: nash_ratio(u, params, n), fam, snap, n_panels)]
    if suite_id == "weighted-nash":
        if spectrum is None:
            raise ValueError("weighted-nash needs a spectrum")
        phi = ground_state_callable(spectrum)
        fam = standard_family(min(R, spectrum.grid.R), seed)
        pars = dict(snap, theta=nash_theta(params))
        return [family_report("weighted-nash", lambda u, n: weighted_nash_phi(u, spectrum, params, n, phi), fam, pars, n_panels)]
    if suite_id == "sobolev":
        if N != 3:
            raise ValueError("the sobolev suite carries admissible tuples for N = 3 only")
        fam = standard_family(R, seed)
        out = []
        for p, q, b, g, nu in SOBOLEV_TUPLES_N3:
            pars = {"p": p, "q": q, "beta": b, "gamma": g, "nu": nu, "dim": N}
            out.append(
                family_report(
                    f"sobolev(p={p:g},q={q:g},beta={b:g},gamma={g:g},nu={nu:g})",
                    lambda u, n, p=p, q=q, b=b, g=g, nu=nu: sobolev_weighted(u, p, q, b, g, nu, N, n),
                    fam,
                    pars,
                    n_panels,
                )
            )
        return out
    if suite_id == "hardy":
        fam = standard_family(R, seed, away_from_origin=True)
        fam = [u for u in fam if u.support[0] > 0]
        s0 = -(N + 2.0 * (0.0 - 1.0)) / 2.0
        fam += [log_profile(10.0**-k, 10.0**k, s0) for k in (1, 2, 3, 4)]
        bound = 1.05 * hardy_constant(2.0, 0.0, N)
        pars = {"p": 2.0, "gamma": 0.0, "dim": N, "proof_constant": hardy_constant(2.0, 0.0, N)}
        return [family_report("hardy", lambda u, n: hardy_divergence(u, 2.0, 0.0, N, n), fam, pars, n_panels, bound=bound)]
    if suite_id == "scaling":
        bstar = critical_beta(N, params.alpha)
        out = []
        for beta in (0.5 * bstar, bstar, 2.0 * bstar):
            res = scaling_optimality(params, beta)
            err = abs(res.empirical_slope - res.analytic_exponent)
            ok = err <= 0.1 and res.blow_up == (beta < bstar)
            out.append(
                InequalityReport(
                    f"scaling(beta={beta:g})",
                    1,
                    float(res.ratios[-1]),
                    dict(snap, beta=beta, analytic_exponent=res.analytic_exponent, empirical_slope=res.empirical_slope),
                    bool(ok),
                    drift=err,
                    note=f"blow-up flagged: {res.blow_up}; expected: {beta < bstar}",
                )
            )
        return out
    raise ValueError(f"unknown inequality suite {suite_id!r}")

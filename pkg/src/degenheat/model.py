"""Coefficients of L = m(x)(1+|x|^alpha) Laplacian, the symmetrizing measure,
closed-form Lyapunov computations and the reference weight profiles.

Radial integrals throughout the package carry the surface factor
|S^{N-1}| explicitly; :func:`mu_density` returns the bare radial density
r^{N-1} / (m(r)(1+r^alpha)) and callers multiply by :func:`sphere_area`.

``alpha = 0`` is reserved for the Laplacian control case: the factor
(1+r^alpha) is replaced by 1, so that L = m(x) Laplacian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, get_args

import numpy as np

M_PRESETS = ("unit", "smooth-bounded")

LYAPUNOV_TOL = 1e-12

ProfileKind = Literal["diffusion", "mu-density", "eigenfunction", "nash", "lyapunov"]


def sphere_area(dim: int) -> float:
    """Surface measure |S^{dim-1}| of the unit sphere in R^dim."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def ball_volume(dim: int) -> float:
    """Lebesgue measure omega_N of the unit ball."""
    return sphere_area(dim) / dim


def _m_unit(r):
    return np.ones_like(np.asarray(r, dtype=float))


def _m_smooth(r):
    r = np.asarray(r, dtype=float)
    return 2.0 - 1.0 / (1.0 + r * r)


_M_FUNCS: dict[str, Callable] = {"unit": _m_unit, "smooth-bounded": _m_smooth}
_M_BOUNDS = {"unit": (1.0, 1.0), "smooth-bounded": (1.0, 2.0)}


@dataclass(frozen=True)
class ProblemParams:
    """Model parameters: dimension, growth exponent, diffusion factor, radius.

    ``m_spec`` names a radial preset for m; only bounded, smooth presets with
    positive infimum are offered.
    """

    dim: int = 3
    alpha: float = 4.0
    m_spec: str = "unit"
    R: float = 32.0
    holder_note: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise ValueError(f"dim must be an integer >= 3, got {self.dim}")
        if not (self.alpha >= 0.0) or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be > 0 (or 0 for the Laplacian control), got {self.alpha}")
        if not (self.R > 0.0) or not math.isfinite(self.R):
            raise ValueError(f"R must be positive, got {self.R}")
        if self.m_spec not in _M_FUNCS:
            raise ValueError(f"unknown m preset {self.m_spec!r}; choose from {M_PRESETS}")

    @property
    def is_control(self) -> bool:
        return self.alpha == 0.0

    @property
    def m_bounds(self) -> tuple[float, float]:
        return _M_BOUNDS[self.m_spec]

    def m(self, r):
        return _M_FUNCS[self.m_spec](r)

    def with_(self, **changes) -> "ProblemParams":
        d = {"dim": self.dim, "alpha": self.alpha, "m_spec": self.m_spec, "R": self.R}
        d.update(changes)
        return ProblemParams(**d)

    def snapshot(self) -> dict:
        return {"dim": self.dim, "alpha": self.alpha, "m_spec": self.m_spec, "R": self.R}


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(~np.isfinite(r)):
        raise ValueError("radius must be finite and nonnegative")
    return r


def growth(params: ProblemParams, r):
    """1 + r^alpha, or 1 in the control case."""
    r = np.asarray(r, dtype=float)
    if params.is_control:
        return np.ones_like(r)
    return 1.0 + r ** params.alpha


def weight_value(params: ProblemParams, r):
    """Diffusion coefficient m(r)(1 + r^alpha) of L at radius r."""
    r = _check_radius(r)
    out = params.m(r) * growth(params, r)
    return float(out) if out.ndim == 0 else out


def mu_density(params: ProblemParams, r):
    """Radial density r^{N-1} / (m(r)(1+r^alpha)) of mu, without |S^{N-1}|."""
    r = _check_radius(r)
    out = r ** (params.dim - 1) / (params.m(r) * growth(params, r))
    return float(out) if out.ndim == 0 else out


def mu_mass(params: ProblemParams, r_max: float | None = None) -> float:
    """mu-measure of the ball of radius r_max (default R), by adaptive quadrature."""
    from scipy.integrate import quad

    r_max = params.R if r_max is None else r_max
    pts = [p for p in (1.0, 10.0) if p < r_max]
    val, _ = quad(lambda s: mu_density(params, s), 0.0, r_max, points=pts or None, limit=400)
    return sphere_area(params.dim) * val


def mu_is_finite(params: ProblemParams) -> bool:
    """The measure mu on R^N is finite iff alpha > N."""
    return params.alpha > params.dim


def apply_L_power(params: ProblemParams, beta: float, r):
    """Closed form of (1+r^alpha) Laplacian of V = (1+r^alpha)^beta.

    Returns alpha*beta*r^{alpha-2} V [alpha(beta-1) r^alpha/(1+r^alpha) + alpha - 2 + N].
    The factor m(r) is omitted; it is positive and does not affect signs.
    """
    r = np.asarray(r, dtype=float)
    a, n = params.alpha, params.dim
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    if np.any(r == 0) and a < 2 and beta != 0:
        raise ZeroDivisionError("r = 0 is a singular point of LV for alpha < 2")
    if beta == 0 or a == 0:
        out = np.zeros_like(r)
    else:
        ra = r**a
        V = (1.0 + ra) ** beta
        # bracket = [c_inf r^a + (a - 2 + N)] / (1 + r^a) with c_inf = a beta + N - 2;
        # c_inf within rounding of 0 (beta = (2-N)/a in floating point) is taken as 0
        c_inf = a * beta + n - 2.0
        if abs(c_inf) <= 8.0 * np.finfo(float).eps * (abs(a * beta) + n):
            c_inf = 0.0
        bracket = (c_inf * ra + (a - 2.0 + n)) / (1.0 + ra)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = a * beta * r ** (a - 2.0) * V * bracket
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LyapunovResult:
    beta: float
    radii: np.ndarray
    pointwise_LV_over_V: np.ndarray
    max_value: float
    admissible: bool
    analytic_range: tuple[float, float]
    lyapunov_constant: float = 0.0


def lyapunov_check(params: ProblemParams, beta: float, grid) -> LyapunovResult:
    """Evaluate LV/V for V = (1+r^alpha)^beta on the grid nodes.

    ``grid`` is a :class:`~degenheat.discretize.RadialGrid` or an array of
    positive radii. Admissible means beta < 0 (the decaying power weights)
    and max LV/V <= 1e-12 (constant c = 0). The constant V = 1 at beta = 0
    trivially has LV = 0 but is not a decaying weight, so it is excluded.
    """
    r = np.asarray(getattr(grid, "nodes", grid), dtype=float)
    r = r[r > 0]
    a, n = params.alpha, params.dim
    V = (1.0 + r**a) ** beta
    ratio = np.asarray(apply_L_power(params, beta, r)) / V
    mx = float(np.max(ratio))
    lo = (2.0 - n) / a if a > 0 else -math.inf
    return LyapunovResult(
        beta=beta,
        radii=r,
        pointwise_LV_over_V=ratio,
        max_value=mx,
        admissible=bool(beta < 0 and mx <= LYAPUNOV_TOL),
        analytic_range=(lo, 0.0),
    )


@dataclass(frozen=True)
class WeightProfile:
    """Reference weight profiles used by the bound checks."""

    kind: ProfileKind
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in get_args(ProfileKind):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "lyapunov" and self.beta is None:
            raise ValueError("lyapunov profile needs beta")

    def __call__(self, params: ProblemParams, r):
        r = np.asarray(r, dtype=float)
        n, a = params.dim, params.alpha
        if self.kind == "diffusion":
            return weight_value(params, r)
        if self.kind == "mu-density":
            return mu_density(params, r)
        if self.kind == "eigenfunction":
            return (1.0 + r) ** (2.0 - n)
        if self.kind == "nash":
            return (1.0 + r**a) ** ((2.0 - n) / 4.0)
        return (1.0 + r**a) ** self.beta


def nash_weight(params: ProblemParams, r):
    """V(r) = (1 + r^alpha)^{(2-N)/4}."""
    return WeightProfile("nash")(params, r)

"""Mode heat kernels, zonal synthesis of p_mu, a Crank-Nicolson propagator
and the heat trace.

Normalization: eigenfunctions are normalized against the discrete mu-masses,
which include the surface factor |S^{N-1}|. With the mode kernel
k_l(r, s, t) = sum_n e^{lambda_n t} phi_n(r) phi_n(s) the full kernel is

    p_mu(x, y, t) = |S^{N-1}| sum_l Z_l(x.y) k_l(|x|, |y|, t)
                  = sum_l h_l P_l(x.y) k_l(|x|, |y|, t),

where P_l = C_l^nu / C_l^nu(1) is the normalized Gegenbauer polynomial.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels
from .discretize import DiscreteFunction, RadialGrid, assemble_mode_operator
from .model import ProblemParams, sphere_area, weight_value
from .spectral import ModeSpectrum, Spectrum, harmonic_dimension, min_centrifugal_gap

TRUNCATION_RTOL = 1e-12
DEFAULT_TAIL_RTOL = 1e-6


class IncreaseEllMax(ValueError):
    """The angular tail bound exceeds the requested tolerance."""


def gegenbauer(ell: int, nu: float, t):
    """C_l^nu(t) by the three-term recurrence."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1.0 + 1e-14):
        raise ValueError("t must lie in [-1, 1]")
    out = np.asarray(kernels.gegenbauer_table(int(ell), float(nu), t_arr.ravel()))[ell]
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def legendre_table(ell_max: int, dim: int, t) -> np.ndarray:
    """P_l(t) = C_l^nu(t)/C_l^nu(1), nu = (N-2)/2, for l = 0..ell_max; shape (ell_max+1, len(t))."""
    nu = (dim - 2) / 2.0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    num = np.asarray(kernels.gegenbauer_table(ell_max, nu, t))
    den = np.asarray(kernels.gegenbauer_table(ell_max, nu, [1.0]))
    return num / den


@dataclass(frozen=True)
class ZonalHarmonic:
    ell: int
    dim: int

    @property
    def dim_h(self) -> int:
        return harmonic_dimension(self.ell, self.dim)

    def __call__(self, t):
        val = legendre_table(self.ell, self.dim, t)[self.ell] * self.dim_h / sphere_area(self.dim)
        return float(val[0]) if np.ndim(t) == 0 else val


@dataclass(frozen=True, eq=False)
class ModeKernel:
    ell: int
    t: float
    values: np.ndarray  # (rows, n) over grid nodes
    truncation_n: int
    rows: np.ndarray  # node indices of the rows


def _truncation(ms: ModeSpectrum, t: float, rtol: float = TRUNCATION_RTOL) -> int:
    e = np.exp(ms.lams * t)
    phi2max = float(np.max(ms.phis**2)) if ms.phis.size else 0.0
    diag = (ms.phis**2) @ e
    dmax = float(np.max(diag)) if diag.size else 0.0
    if dmax == 0.0:
        return len(e)
    k = len(e)
    remaining = len(e) - np.arange(1, len(e) + 1)  # pairs after index j
    # tail estimate after keeping j+1 pairs: e_{j+1} * remaining * max phi^2
    est = np.zeros(len(e))
    est[:-1] = e[1:] * remaining[:-1] * phi2max
    ok = np.nonzero(est <= rtol * dmax)[0]
    if ok.size:
        k = int(ok[0]) + 1
    return k


def mode_kernel(spectrum: Spectrum, ell: int, t: float, rows=None) -> ModeKernel:
    """Matrix k_l(r_i, r_j, t) over grid nodes (optionally a subset of rows)."""
    if not t > 0:
        raise ValueError("t must be positive")
    ms = spectrum.mode(ell)
    k = _truncation(ms, t)
    P = ms.phis[:, :k]
    e = np.exp(ms.lams[:k] * t)
    idx = np.arange(spectrum.grid.n) if rows is None else np.asarray(rows, dtype=int)
    vals = (P[idx] * e) @ P.T
    if rows is None:
        vals = 0.5 * (vals + vals.T)
    return ModeKernel(ell, float(t), vals, k, idx)


def _origin_values(ms: ModeSpectrum) -> np.ndarray:
    r = ms.op.grid.nodes
    if ms.ell != 0:
        return np.zeros(ms.phis.shape[1])
    # even extrapolation through the first two nodes in r^2
    r1, r2 = r[0] ** 2, r[1] ** 2
    return (r2 * ms.phis[0] - r1 * ms.phis[1]) / (r2 - r1)


class _ModeEvaluator:
    """Monotone piecewise-cubic evaluation of a mode's eigenfunctions at arbitrary radii."""

    def __init__(self, ms: ModeSpectrum):
        self.ms = ms
        self.nodes = ms.op.grid.nodes
        self._interp = None

    @property
    def interp(self):
        if self._interp is None:
            r = np.concatenate(([0.0], self.nodes))
            Y = np.vstack([_origin_values(self.ms)[None, :], self.ms.phis])
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                self._interp = PchipInterpolator(r, Y, axis=0, extrapolate=False)
        return self._interp

    def phis_at(self, radii: np.ndarray) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        out = np.empty((radii.size, self.ms.phis.shape[1]))
        pos = np.searchsorted(self.nodes, radii)
        on = (pos < len(self.nodes)) & (self.nodes[np.minimum(pos, len(self.nodes) - 1)] == radii)
        out[on] = self.ms.phis[pos[on]]
        if np.any(~on):
            if np.any(radii[~on] > self.nodes[-1]) or np.any(radii[~on] < 0):
                raise ValueError("radius outside [0, R]")
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                out[~on] = self.interp(radii[~on])
        return out


@dataclass(frozen=True, eq=False)
class KernelEvaluation:
    rx: np.ndarray
    ry: np.ndarray
    costheta: np.ndarray
    t: float
    value_mu: np.ndarray
    value_lebesgue: np.ndarray
    tail_bound: np.ndarray
    ell_max: int


class KernelAssembler:
    """Cached evaluator of p_mu(x, y, t) for one spectrum."""

    def __init__(self, spectrum: Spectrum):
        self.spectrum = spectrum
        self._evals: dict[int, _ModeEvaluator] = {}
        self._gap = min_centrifugal_gap(spectrum.params, spectrum.grid)

    def _ev(self, ell: int) -> _ModeEvaluator:
        if ell not in self._evals:
            self._evals[ell] = _ModeEvaluator(self.spectrum.mode(ell))
        return self._evals[ell]

    def mode_values(self, ell: int, rx, ry, t: float) -> np.ndarray:
        ms = self.spectrum.mode(ell)
        k = _truncation(ms, t)
        ev = self._ev(ell)
        A = ev.phis_at(rx)[:, :k]
        B = ev.phis_at(ry)[:, :k]
        # A * B is commutative elementwise, so swapping rx and ry is bit-exact
        return (A * B) @ np.exp(ms.lams[:k] * t)

    def tail_bound(self, rx, ry, t: float, ell_max: int) -> np.ndarray:
        """Bound on |sum_{l > ell_max} h_l P_l k_l| from the centrifugal gap.

        Uses lambda_{l,1} <= lambda_{L,1} - (c_l - c_L) g with g = min W/r^2,
        k_l(r, r, t) <= e^{lambda_{l,1} t/2} k_L(r, r, t/2) (mode domination)
        and Cauchy-Schwarz in (r, s).
        """
        sp = self.spectrum
        N = sp.params.dim
        L = ell_max
        lamL = sp.mode(L).lams[0]
        cL = L * (L + N - 2.0)
        dx = self.mode_values(L, rx, rx, 0.5 * t)
        dy = self.mode_values(L, ry, ry, 0.5 * t)
        scale = np.sqrt(np.maximum(dx, 0.0) * np.maximum(dy, 0.0))
        total = 0.0
        ell = L + 1
        while True:
            c = ell * (ell + N - 2.0)
            lam_bound = lamL - (c - cL) * self._gap
            term = harmonic_dimension(ell, N) * math.exp(0.5 * t * lam_bound)
            total += term
            if term <= 1e-17 * total or (term == 0.0 and lam_bound < lamL):
                break
            ell += 1
            if ell > L + 200_000:
                return np.full(np.shape(rx), np.inf)
        return total * scale

    def evaluate(
        self,
        rx,
        ry,
        costheta,
        t: float,
        ell_max: int | None = None,
        tail_rtol: float | None = DEFAULT_TAIL_RTOL,
    ) -> KernelEvaluation:
        if not t > 0:
            raise ValueError("t must be positive")
        sp = self.spectrum
        rx, ry, ct = np.broadcast_arrays(
            np.atleast_1d(np.asarray(rx, float)),
            np.atleast_1d(np.asarray(ry, float)),
            np.atleast_1d(np.asarray(costheta, float)),
        )
        if np.any(np.abs(ct) > 1.0):
            raise ValueError("cos(theta) must lie in [-1, 1]")
        L = sp.ell_max if ell_max is None else int(ell_max)
        if L > sp.ell_max:
            raise IncreaseEllMax(f"spectrum only has modes up to {sp.ell_max}")
        N = sp.params.dim
        P = legendre_table(L, N, ct.ravel())
        val = np.zeros(rx.size)
        for ell in range(L + 1):
            val += harmonic_dimension(ell, N) * P[ell] * self.mode_values(ell, rx.ravel(), ry.ravel(), t)
        tail = self.tail_bound(rx.ravel(), ry.ravel(), t, L)
        if tail_rtol is not None:
            dscale = np.sqrt(np.abs(self.diagonal(rx.ravel(), t, L) * self.diagonal(ry.ravel(), t, L)))
            bad = tail > tail_rtol * dscale
            if np.any(bad):
                worst = float(np.max(tail[bad] / np.maximum(dscale[bad], 1e-300)))
                raise IncreaseEllMax(
                    f"angular tail bound {worst:.3g} (relative) exceeds {tail_rtol:g}; increase ell_max beyond {L}"
                )
        leb = val / weight_value(sp.params, ry.ravel())
        shape = rx.shape
        return KernelEvaluation(
            rx.copy(), ry.copy(), ct.copy(), float(t), val.reshape(shape), leb.reshape(shape), tail.reshape(shape), L
        )

    def diagonal(self, r, t: float, ell_max: int | None = None) -> np.ndarray:
        """p_mu(x, x, t) with |x| = r."""
        sp = self.spectrum
        L = sp.ell_max if ell_max is None else ell_max
        r = np.atleast_1d(np.asarray(r, float))
        out = np.zeros(r.size)
        for ell in range(L + 1):
            out += harmonic_dimension(ell, sp.params.dim) * self.mode_values(ell, r, r, t)
        return out


def assemble_kernel(spectrum: Spectrum, x, y, t: float, ell_max: int | None = None, tail_rtol=DEFAULT_TAIL_RTOL) -> KernelEvaluation:
    """p_mu(x, y, t) with points given as x = (rx, costheta) and y = ry, or x, y radii with costheta.

    ``x`` may be a pair ``(rx, costheta)``; otherwise cos(theta) = 1.
    """
    if isinstance(x, tuple):
        rx, ct = x
    else:
        rx, ct = x, 1.0
    return KernelAssembler(spectrum).evaluate(rx, y, ct, t, ell_max, tail_rtol)


# ---------------------------------------------------------------- propagators


def _interior(f: DiscreteFunction) -> np.ndarray:
    return np.asarray(f.values, float)[:-1]


def step_cn(params: ProblemParams, grid: RadialGrid, f: DiscreteFunction, t: float, steps: int, n_implicit: int = 2) -> DiscreteFunction:
    """Crank-Nicolson for u' = S u on mode ``f.ell`` with Rannacher start-up."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not t > 0:
        raise ValueError("t must be positive")
    op = assemble_mode_operator(params, grid, f.ell)
    y0 = op.sqrt_w * _interior(f)
    y = kernels.cn_propagate(op.diag, op.offdiag, y0, t / steps, int(steps), int(n_implicit))
    out = np.zeros(grid.n)
    out[:-1] = y / op.sqrt_w
    return DiscreteFunction(grid, out, f.ell)


def spectral_propagate(ms: ModeSpectrum, f: DiscreteFunction, t: float) -> DiscreteFunction:
    """T(t) f = sum_n e^{lambda_n t} <f, phi_n>_mu phi_n within one mode."""
    if f.ell != ms.ell:
        raise ValueError("mode mismatch")
    w = ms.op.mu_weights
    c = ms.phis.T @ (w * np.asarray(f.values, float))
    return DiscreteFunction(f.grid, ms.phis @ (np.exp(ms.lams * t) * c), f.ell)


def propagate_radial(spectrum: Spectrum, values, t: float) -> np.ndarray:
    """T(t) applied to a radial function given at grid nodes (Dirichlet at R)."""
    ms = spectrum.mode(0)
    v = np.asarray(values, float).copy()
    v[-1] = 0.0
    return spectral_propagate(ms, DiscreteFunction(spectrum.grid, v, 0), t).values


@dataclass(frozen=True)
class TraceResult:
    t: float
    spectral_sum: float
    diagonal_quadrature: float

    @property
    def relative_gap(self) -> float:
        return abs(self.spectral_sum - self.diagonal_quadrature) / abs(self.spectral_sum)


def trace(spectrum: Spectrum, t: float) -> TraceResult:
    """Heat trace from the eigenvalues and from quadrature of p_mu(x, x, t) against mu."""
    if not t > 0:
        raise ValueError("t must be positive")
    a = 0.0
    b = 0.0
    for ms in spectrum.modes:
        e = np.exp(ms.lams * t)
        a += ms.multiplicity * math.fsum(e)
        diag = (ms.phis**2) @ e
        b += ms.multiplicity * math.fsum(ms.op.mu_weights * diag)
    return TraceResult(float(t), a, b)


def write_kernel_csv(evals, fh=None) -> str:
    """CSV with columns rx, ry, costheta, t, p_mu, p_lebesgue, tail_bound."""
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rx", "ry", "costheta", "t", "p_mu", "p_lebesgue", "tail_bound"])
    for ev in evals:
        for row in zip(ev.rx.ravel(), ev.ry.ravel(), ev.costheta.ravel(), ev.value_mu.ravel(), ev.value_lebesgue.ravel(), ev.tail_bound.ravel()):
            rx, ry, ct, pm, pl, tb = row
            w.writerow([f"{v:.16e}" for v in (rx, ry, ct, ev.t, pm, pl, tb)])
    return buf.getvalue() if fh is None else ""

"""Radial Newtonian potential, the J(x) integral and the decay-iteration ladder."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .discretize import DiscreteFunction
from .model import ProblemParams, sphere_area

J_OUTER = 1e6
GL_NODES = 64


def newtonian_radial(f: DiscreteFunction, params: ProblemParams) -> DiscreteFunction:
    """u(r) = (1/(N-2)) [r^{2-N} int_0^r f s^{N-1} ds + int_r^R f s ds].

    Integrals use the trapezoid rule on [0, r_1, ..., R]; the value at the
    origin is taken equal to f(r_1) (it carries zero weight in both integrals).
    """
    N = params.dim
    r = f.grid.nodes
    v = np.asarray(f.values, dtype=float)
    if v.shape != r.shape:
        raise ValueError("values do not match the grid")
    s = np.concatenate(([0.0], r))
    fv = np.concatenate(([v[0]], v))
    inner = cumulative_trapezoid(fv * s ** (N - 1), s, initial=0.0)[1:]
    outer_cum = cumulative_trapezoid(fv * s, s, initial=0.0)
    outer = (outer_cum[-1] - outer_cum)[1:]
    u = (r ** (2 - N) * inner + outer) / (N - 2)
    return DiscreteFunction(f.grid, u, f.ell)


@dataclass(frozen=True)
class JParams:
    gamma: float
    beta: float
    dim: int = 3

    def __post_init__(self):
        if not 0 < self.gamma < self.dim:
            raise ValueError(f"need 0 < gamma < N, got gamma={self.gamma}, N={self.dim}")
        if not self.beta > 0:
            raise ValueError("need beta > 0")
        if not self.gamma + self.beta > self.dim:
            raise ValueError(f"need gamma + beta > N, got {self.gamma + self.beta} <= {self.dim}")

    @property
    def regime(self) -> str:
        if self.beta < self.dim:
            return "power"
        if self.beta == self.dim:
            return "log"
        return "decay"

    @property
    def exponent(self) -> float:
        """Exponent of |x| in the large-|x| regime (log factor aside)."""
        if self.beta < self.dim:
            return self.dim - (self.gamma + self.beta)
        return -self.gamma


def _gl(n: int = GL_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _composite(breaks: np.ndarray, n: int = GL_NODES):
    x, w = _gl(n)
    a, b = breaks[:-1, None], breaks[1:, None]
    return (a + (b - a) * x).ravel(), ((b - a) * w).ravel()


def _graded_breaks(a: float, b: float, toward: str, scale: float, levels: int = 40) -> np.ndarray:
    """Panel breaks on [a, b] refining geometrically toward one end down to ``scale``."""
    L = b - a
    if L <= 0:
        return np.array([a, b])
    k = max(1, min(levels, int(math.ceil(math.log2(max(L / max(scale, 1e-300), 2.0)))) + 2))
    d = L * 2.0 ** -np.arange(k, -1, -1.0)  # L 2^-k .. L
    pts = np.concatenate(([0.0], d))
    if toward == "a":
        return a + pts
    return b - pts[::-1]


def _angular(r: float, s, jp: JParams):
    """int_{S^{N-1}} |x - s y_hat|^{-gamma} dsigma with |x| = r, vectorized over s."""
    N, g = jp.dim, jp.gamma
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if N == 3 and g == 1.0:
        out = 4.0 * math.pi / np.maximum(r, s_arr)
    elif r == 0.0:
        out = sphere_area(N) * s_arr ** (-g)
    else:
        # t = 1 - 2 v^2: the |x-y| singularity sits at v = 0, the (1-t^2) weight at v = 1
        b0 = _graded_breaks(0.0, 0.5, "a", 1e-14)
        b1 = _graded_breaks(0.5, 1.0, "b", 1e-8)
        v, w = _composite(np.concatenate((b0, b1[1:])), 32)
        wv = w * 4.0 * v * (4.0 * v * v * (1.0 - v * v)) ** ((N - 3) / 2.0)
        out = np.empty(s_arr.size)
        for i0 in range(0, s_arr.size, 512):
            sc = s_arr[i0 : i0 + 512, None]
            dist2 = (r - sc) ** 2 + 4.0 * r * sc * v * v
            out[i0 : i0 + 512] = (dist2 ** (-g / 2.0)) @ wv
        out *= sphere_area(N - 1)
        zero = s_arr == 0.0
        out[zero] = sphere_area(N) * r ** (-g)
    return float(out[0]) if np.ndim(s) == 0 else out


def j_tail(jp: JParams, S: float = J_OUTER) -> float:
    """Analytic tail |S^{N-1}| S^{N-gamma-beta}/(gamma+beta-N) of the outer integral."""
    return sphere_area(jp.dim) * S ** (jp.dim - jp.gamma - jp.beta) / (jp.gamma + jp.beta - jp.dim)


def j_integral(x_radius: float, jp: JParams, S: float = J_OUTER, include_tail: bool = True) -> float:
    """J(x) = int dy / (|x-y|^gamma (1+|y|^beta)) by radial x angular quadrature.

    Radial panels split at s = |x| and refine geometrically toward it; the
    integral is truncated at S and the analytic far-field tail is added
    when ``include_tail`` (its relative error is O((|x|/S)^2)).
    """
    r = float(x_radius)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    N, beta = jp.dim, jp.beta
    if r >= S:
        raise ValueError("|x| must be below the outer cut")
    if r > 0:
        inner = _graded_breaks(0.0, r, "b", r * 1e-10)
        inner = np.concatenate((_graded_breaks(0.0, inner[1], "a", 1e-12)[:-1], inner[1:]))
        mid_end = min(S, 2.0 * r)
        outer_near = _graded_breaks(r, mid_end, "a", r * 1e-10)
    else:
        inner = np.array([0.0])
        outer_near = np.array([0.0])
        mid_end = 0.0
    start = max(mid_end, 1e-12)
    far = np.geomspace(max(start, 1e-3), S, int(4 * math.log10(S / max(start, 1e-3))) + 2)
    if start < 1e-3:
        far = np.concatenate(([start], far)) if r == 0 else far
    breaks = np.unique(np.concatenate((inner, outer_near, far)))
    if r == 0:
        breaks = np.unique(np.concatenate(([0.0], breaks)))
    s, w = _composite(breaks)
    A = _angular(r, s, jp)
    val = float(np.dot(w, s ** (N - 1) / (1.0 + s**beta) * A))
    if include_tail:
        val += j_tail(jp, S)
    return val


def fit_j_exponent(radii, jp: JParams, log_corrected: bool = False) -> float:
    """Slope of log J (or log(J/log|x|)) against log |x|."""
    radii = np.asarray(radii, dtype=float)
    J = np.array([j_integral(x, jp) for x in radii])
    y = np.log(J / np.log(radii)) if log_corrected else np.log(J)
    return float(np.polyfit(np.log(radii), y, 1)[0])


def j_csv(radii, jp: JParams) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x_radius", "J", "fitted_regime"])
    for x in radii:
        w.writerow([f"{x:.16e}", f"{j_integral(x, jp):.16e}", jp.regime])
    return buf.getvalue()


@dataclass(frozen=True)
class IterationPlan:
    """Decay ladder for eigenfunctions.

    ``exponent_sequence`` follows the J regimes: from |phi| <~ (1+|x|)^e the
    representation formula gives decay e + 2 - alpha while alpha - e < N,
    and 2 - N once alpha - e >= N (with a log factor at equality).
    ``capped_sequence`` is the plain list max(j(2-alpha), 2-N), j = 1..k.
    """

    alpha: float
    N: int
    k: int
    exponent_sequence: tuple[float, ...]
    log_step: bool = False
    capped_sequence: tuple[float, ...] = field(default=())

    @property
    def final_exponent(self) -> float:
        return self.exponent_sequence[-1]


def iteration_plan(alpha: float, N: int) -> IterationPlan:
    if not alpha > 2:
        raise ValueError("the iteration needs alpha > 2")
    k = int(math.floor(N / (alpha - 2))) + 1
    seq = []
    e = 0.0
    log_step = False
    while True:
        b = alpha - e
        if b < N and len(seq) < k:
            e = e + 2.0 - alpha
            seq.append(e)
            continue
        if b == N:
            log_step = True
        if not seq or seq[-1] != 2 - N:
            seq.append(float(2 - N))
        break
    capped = tuple(max(j * (2.0 - alpha), 2.0 - N) for j in range(1, k + 1))
    return IterationPlan(alpha, N, k, tuple(seq), log_step, capped)

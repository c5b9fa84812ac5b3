"""Radial grids, mode operators and the discrete mu inner product.

The mode-l operator is assembled from the discrete Dirichlet form

    a_h(u, v) = |S| sum_edges c_e (du)(dv) + |S| l(l+N-2) sum_i u_i v_i r_i^{N-3} D_i

with edge conductance c_e = r_mid^{N-1} / h_e (midpoint rule) and dual cell
length D_i, and from the trapezoidal mu-masses w_i = |S| rho(r_i) D_i. The
generalized problem K u = -lambda M u is mapped to a symmetric tridiagonal
matrix by the diagonal similarity with sqrt(w). Unknowns live on nodes
r_1 .. r_{n-1}; the last node r_n = R carries the Dirichlet value 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .model import ProblemParams, growth, sphere_area

MIN_NODES = 16


@dataclass(frozen=True)
class Grading:
    """Grid grading descriptor.

    kind
        ``"uniform"``, ``"geometric"`` (ratio ``q`` or first node ``r_first``)
        or ``"piecewise"`` (a sinh map: uniform spacing near 0, geometric far
        out, with at least ``fraction_inner`` of the nodes in (0, 1]).
    """

    kind: Literal["uniform", "geometric", "piecewise"] = "piecewise"
    q: float | None = None
    r_first: float | None = None
    fraction_inner: float = 0.3

    @classmethod
    def parse(cls, text: str) -> "Grading":
        """Parse ``uniform``, ``piecewise[:f]``, ``geometric:q=1.01`` or ``geometric:r1=1e-3``."""
        head, _, rest = text.strip().partition(":")
        kw = {}
        for item in filter(None, rest.split(",")):
            k, _, v = item.partition("=")
            k = k.strip()
            if head == "piecewise" and not v:
                kw["fraction_inner"] = float(k)
            elif k == "q":
                kw["q"] = float(v)
            elif k in ("r1", "r_first"):
                kw["r_first"] = float(v)
            elif k in ("f", "fraction_inner"):
                kw["fraction_inner"] = float(v)
            else:
                raise ValueError(f"unknown grading option {item!r}")
        if head not in ("uniform", "geometric", "piecewise"):
            raise ValueError(f"unknown grading {head!r}")
        return cls(kind=head, **kw)

    def __str__(self) -> str:
        if self.kind == "geometric":
            return f"geometric:q={self.q!r}" if self.q is not None else f"geometric:r1={self.r_first!r}"
        if self.kind == "piecewise":
            return f"piecewise:f={self.fraction_inner!r}"
        return "uniform"


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    grading: Grading
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def R(self) -> float:
        return float(self.nodes[-1])

    def dual_lengths(self) -> np.ndarray:
        """Trapezoidal dual cells of the mesh 0 = r_0 < r_1 < ... < r_n."""
        r = np.concatenate(([0.0], self.nodes))
        d = np.empty(self.n)
        d[:-1] = 0.5 * (r[2:] - r[:-2])
        d[-1] = 0.5 * (r[-1] - r[-2])
        return d


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    h = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def _make_grid(nodes: np.ndarray, grading: Grading) -> RadialGrid:
    nodes = np.asarray(nodes, dtype=float)
    if nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
        raise ValueError("grid nodes must be positive and strictly increasing")
    nodes.setflags(write=False)
    w = _trapezoid_weights(nodes)
    w.setflags(write=False)
    return RadialGrid(nodes=nodes, grading=grading, weights=w)


def build_grid(params: ProblemParams | float, n: int, grading: Grading | str = "piecewise") -> RadialGrid:
    """Graded grid of ``n`` nodes in (0, R] with last node exactly R."""
    R = params.R if isinstance(params, ProblemParams) else float(params)
    if isinstance(grading, str):
        grading = Grading.parse(grading)
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
    if not R > 0:
        raise ValueError("R must be positive")
    i = np.arange(1, n + 1, dtype=float)
    if grading.kind == "uniform":
        nodes = R * i / n
    elif grading.kind == "geometric":
        if grading.q is not None:
            q = grading.q
            if not q > 1.0:
                raise ValueError(f"geometric ratio must exceed 1, got {q}")
            r1 = R / q ** (n - 1)
        elif grading.r_first is not None:
            r1 = grading.r_first
            if not 0 < r1 < R:
                raise ValueError("r_first must lie in (0, R)")
            q = (R / r1) ** (1.0 / (n - 1))
        else:
            raise ValueError("geometric grading needs q or r_first")
        nodes = r1 * q ** (i - 1)
    else:
        f = grading.fraction_inner
        if not 0 < f < 1:
            raise ValueError("fraction_inner must lie in (0, 1)")
        if R <= 1.0 / f:
            nodes = R * i / n
        else:
            # sinh map r = a sinh(b s); choose a so a fraction f of s lands in (0, 1]
            a = brentq(lambda a: math.asinh(1.0 / a) / math.asinh(R / a) - f, 1e-12, 1e12)
            b = math.asinh(R / a)
            nodes = a * np.sinh(b * i / n)
    nodes[-1] = R
    return _make_grid(nodes, grading)


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    grid: RadialGrid
    values: np.ndarray
    ell: int = 0

    def __post_init__(self):
        if len(self.values) != self.grid.n:
            raise ValueError("values length must match the grid")

    def __mul__(self, c: float) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, self.values * c, self.ell)

    __rmul__ = __mul__


def centrifugal(params: ProblemParams, ell: int) -> float:
    return ell * (ell + params.dim - 2.0)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Symmetric tridiagonal S for mode ``ell`` in mu-orthonormal coordinates.

    ``diag`` and ``offdiag`` act on the interior unknowns r_1..r_{n-1};
    ``mu_weights`` has one entry per grid node (the last one only matters
    for functions that do not vanish at R).
    """

    params: ProblemParams
    grid: RadialGrid
    ell: int
    diag: np.ndarray
    offdiag: np.ndarray
    mu_weights: np.ndarray
    conductance: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)
    bc: tuple[str, str] = ("regular-at-origin", "dirichlet-at-R")

    @property
    def size(self) -> int:
        return len(self.diag)

    @property
    def sqrt_w(self) -> np.ndarray:
        return np.sqrt(self.mu_weights[: self.size])

    def matvec(self, u: np.ndarray) -> np.ndarray:
        """S u for nodal values u (interior part); returns interior values."""
        u = np.asarray(u, dtype=float)[: self.size]
        y = self.sqrt_w * u
        z = self.diag * y
        z[:-1] += self.offdiag * y[1:]
        z[1:] += self.offdiag * y[:-1]
        return z / self.sqrt_w

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def assemble_mode_operator(params: ProblemParams, grid: RadialGrid, ell: int) -> ModeOperator:
    """Assemble the symmetric tridiagonal operator of mode ``ell``."""
    if ell < 0 or int(ell) != ell:
        raise ValueError("ell must be a nonnegative integer")
    N = params.dim
    S = sphere_area(N)
    r = grid.nodes
    rr = np.concatenate(([0.0], r))
    h = np.diff(rr)
    mid = 0.5 * (rr[1:] + rr[:-1])
    cond = mid ** (N - 1) / h  # edge (i-1, i), i = 1..n; edge 0 joins the origin
    if ell == 0:
        cond[0] = 0.0  # even reflection: no flux through the origin
    dual = grid.dual_lengths()
    w = S * r ** (N - 1) / (params.m(r) * growth(params, r)) * dual
    pot = centrifugal(params, ell) * r ** (N - 3) * dual
    m = grid.n - 1
    Kd = S * (cond[:m] + cond[1 : m + 1] + pot[:m])
    Ko = -S * cond[1:m]
    ws = np.sqrt(w[:m])
    diag = -Kd / w[:m]
    off = -Ko / (ws[:-1] * ws[1:])
    for a in (diag, off, w, cond, pot):
        a.setflags(write=False)
    return ModeOperator(params, grid, ell, diag, off, w, cond, pot)


def inner_mu(u: DiscreteFunction, v: DiscreteFunction, op: ModeOperator) -> float:
    """Discrete L^2_mu inner product sum u_i v_i w_i."""
    if u.grid is not v.grid and not np.array_equal(u.grid.nodes, v.grid.nodes):
        raise ValueError("functions live on different grids")
    if not np.array_equal(u.grid.nodes, op.grid.nodes):
        raise ValueError("operator grid does not match")
    if u.ell != v.ell:
        raise ValueError("functions live on different modes")
    return float(np.sum(u.values * v.values * op.mu_weights))


def dirichlet_form(
    u: DiscreteFunction,
    v: DiscreteFunction,
    grid: RadialGrid,
    params: ProblemParams,
    ell: int | None = None,
    tol: float = 0.0,
) -> float:
    """Discrete a(u, v): midpoint-rule gradient energy plus centrifugal term."""
    ell = u.ell if ell is None else ell
    uv, vv = np.asarray(u.values, float), np.asarray(v.values, float)
    if abs(uv[-1]) > tol or abs(vv[-1]) > tol:
        raise ValueError("Dirichlet form needs functions vanishing at R")
    N = params.dim
    S = sphere_area(N)
    r = grid.nodes
    rr = np.concatenate(([0.0], r))
    h = np.diff(rr)
    mid = 0.5 * (rr[1:] + rr[:-1])
    # origin value: even reflection for l = 0, zero for l >= 1
    u0 = uv[0] if ell == 0 else 0.0
    v0 = vv[0] if ell == 0 else 0.0
    du = np.diff(np.concatenate(([u0], uv))) / h
    dv = np.diff(np.concatenate(([v0], vv))) / h
    grad = np.sum(du * dv * mid ** (N - 1) * h)
    cent = centrifugal(params, ell) * np.sum(uv * vv * r ** (N - 3) * grid.dual_lengths())
    return float(S * (grad + cent))

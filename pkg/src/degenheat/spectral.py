"""Per-mode eigensolves, the ground state, decay fits and eigenvalue counting."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import kernels
from .discretize import (
    DiscreteFunction,
    ModeOperator,
    RadialGrid,
    assemble_mode_operator,
    centrifugal,
)
from .model import ProblemParams, growth

RELIABLE_NODES_PER_OSCILLATION = 8.0
# diagonal magnitude above which MRRR loses the bottom of the spectrum
STEMR_RANGE_LIMIT = 1e9
_TINY_ABSTOL = 2.0 * np.finfo(float).tiny


class EigensolverError(RuntimeError):
    def __init__(self, ell: int, msg: str):
        super().__init__(f"mode ell={ell}: {msg}")
        self.ell = ell


def harmonic_dimension(ell: int, dim: int) -> int:
    """Dimension h_l of degree-l spherical harmonics on S^{dim-1}."""
    if ell == 0:
        return 1
    return math.comb(ell + dim - 1, dim - 1) - math.comb(ell + dim - 3, dim - 1)


@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: float
    phi: DiscreteFunction
    ell: int
    radial_index: int
    multiplicity: int = 1


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Eigenpairs of one mode, sorted by decreasing eigenvalue.

    ``vectors`` are the orthonormal eigenvectors of the symmetric matrix
    (interior nodes); ``phis`` the mu-normalized nodal eigenfunctions on
    all grid nodes (last row zero).
    """

    op: ModeOperator
    lams: np.ndarray
    vectors: np.ndarray
    phis: np.ndarray
    multiplicity: int
    nodes_per_oscillation: np.ndarray
    complete: bool

    @property
    def ell(self) -> int:
        return self.op.ell

    @property
    def reliable(self) -> np.ndarray:
        return self.nodes_per_oscillation >= RELIABLE_NODES_PER_OSCILLATION

    @property
    def reliable_count(self) -> int:
        """Length of the reliable prefix."""
        bad = np.nonzero(~self.reliable)[0]
        return int(bad[0]) if bad.size else len(self.lams)

    def residuals(self) -> np.ndarray:
        """||S phi - lambda phi||_mu for each pair."""
        S = self.op
        Y = self.vectors
        Z = S.diag[:, None] * Y
        Z[:-1] += S.offdiag[:, None] * Y[1:]
        Z[1:] += S.offdiag[:, None] * Y[:-1]
        return np.linalg.norm(Z - Y * self.lams[None, :], axis=0)


@dataclass(frozen=True, eq=False)
class Spectrum:
    params: ProblemParams
    grid: RadialGrid
    modes: tuple[ModeSpectrum, ...]
    lam_cap: float | None = None  # every eigenvalue with |lam| <= lam_cap is present

    @property
    def ell_max(self) -> int:
        return self.modes[-1].ell

    def mode(self, ell: int) -> ModeSpectrum:
        m = self.modes[ell]
        assert m.ell == ell
        return m

    @cached_property
    def _merged(self):
        lam = np.concatenate([m.lams for m in self.modes])
        mult = np.concatenate([np.full(len(m.lams), m.multiplicity) for m in self.modes])
        ell = np.concatenate([np.full(len(m.lams), m.ell) for m in self.modes])
        idx = np.concatenate([np.arange(1, len(m.lams) + 1) for m in self.modes])
        rel = np.concatenate([m.reliable for m in self.modes])
        order = np.lexsort((idx, ell, -lam))
        return lam[order], mult[order], ell[order], idx[order], rel[order]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Distinct (ell, n) eigenvalues sorted decreasingly."""
        return self._merged[0]

    @property
    def multiplicities(self) -> np.ndarray:
        return self._merged[1]

    @cached_property
    def pairs(self) -> list[EigenPair]:
        out = []
        lam, mult, ell, idx, _ = self._merged
        for la, h, l, k in zip(lam, mult, ell, idx):
            m = self.modes[l]
            out.append(EigenPair(float(la), DiscreteFunction(self.grid, m.phis[:, k - 1], int(l)), int(l), int(k), int(h)))
        return out

    def complete_below(self) -> float:
        """Largest |lambda| up to which no eigenvalue is missing from the merge."""
        caps = [abs(self.modes[-1].lams[0])]
        caps += [abs(m.lams[-1]) for m in self.modes if not m.complete]
        if self.lam_cap is not None:
            caps.append(self.lam_cap)
        return float(min(caps))

    def reliable_below(self) -> float:
        """Largest |lambda| below which all computed eigenpairs pass the reliability cutoff."""
        cut = math.inf
        for m in self.modes:
            k = m.reliable_count
            if k < len(m.lams):
                cut = min(cut, abs(m.lams[k]))
        return cut

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ell", "n", "lambda", "multiplicity"])
        lam, mult, ell, idx, _ = self._merged
        for la, h, l, k in zip(lam, mult, ell, idx):
            w.writerow([int(l), int(k), f"{la:.16e}", int(h)])
        return buf.getvalue()


def _fix_signs(Y: np.ndarray) -> np.ndarray:
    # first significant entry from the origin positive
    amax = np.max(np.abs(Y), axis=0)
    sig = np.abs(Y) > 1e-6 * amax
    first = np.argmax(sig, axis=0)
    s = np.sign(Y[first, np.arange(Y.shape[1])])
    s[s == 0] = 1.0
    return Y * s


def _choose_driver(op: ModeOperator, k: int, driver: str) -> str:
    if driver != "auto":
        return driver
    if np.max(np.abs(op.diag)) > STEMR_RANGE_LIMIT or k <= 64:
        return "stebz"
    return "stemr"


def solve_mode(
    op: ModeOperator,
    n_eig: int | None = None,
    lam_min: float | None = None,
    driver: str = "auto",
) -> ModeSpectrum:
    """Top eigenpairs of one mode operator.

    Either the ``n_eig`` largest eigenvalues (all when None) or, when
    ``lam_min`` is given, every eigenvalue >= lam_min.
    """
    m = op.size
    kw = {}
    if lam_min is not None:
        kw = dict(select="v", select_range=(lam_min, 0.0))
        k_est = m
    else:
        k = m if n_eig is None else min(int(n_eig), m)
        if k < m:
            kw = dict(select="i", select_range=(m - k, m - 1))
        k_est = k
    drv = _choose_driver(op, k_est, driver)
    try:
        if drv == "stebz":
            lam, Y = eigh_tridiagonal(op.diag, op.offdiag, lapack_driver="stebz", tol=_TINY_ABSTOL, **kw)
        else:
            lam, Y = eigh_tridiagonal(op.diag, op.offdiag, lapack_driver=drv, **kw)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(op.ell, f"tridiagonal eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise EigensolverError(op.ell, "non-finite eigenvalues")
    lam = lam[::-1].copy()
    Y = _fix_signs(np.ascontiguousarray(Y[:, ::-1]))
    phis = np.zeros((op.grid.n, len(lam)))
    phis[:m] = Y / op.sqrt_w[:, None]
    if len(lam):
        nodes = np.asarray(kernels.oscillation_spacing(Y))
    else:
        nodes = np.zeros(0)
    complete = (lam_min is not None) or len(lam) == m
    return ModeSpectrum(
        op=op,
        lams=lam,
        vectors=Y,
        phis=phis,
        multiplicity=harmonic_dimension(op.ell, op.params.dim),
        nodes_per_oscillation=nodes,
        complete=complete,
    )


def solve_modes(
    params: ProblemParams,
    grid: RadialGrid,
    ell_max: int,
    n_per_mode: int | None = None,
    driver: str = "auto",
    workers: int | None = None,
    lam_max: float | None = None,
) -> Spectrum:
    """Solve modes 0..ell_max and merge them into a :class:`Spectrum`.

    With ``lam_max`` each mode keeps exactly its eigenvalues with
    |lambda| <= lam_max (``n_per_mode`` is then ignored).
    """
    if ell_max < 0:
        raise ValueError("ell_max must be >= 0")

    def one(ell):
        op = assemble_mode_operator(params, grid, ell)
        if lam_max is not None:
            return solve_mode(op, lam_min=-lam_max, driver="stebz" if driver == "auto" else driver)
        return solve_mode(op, n_per_mode, driver=driver)

    modes = _map(one, range(ell_max + 1), workers)
    if any(len(m.lams) == 0 for m in modes):
        empty = [m.ell for m in modes if len(m.lams) == 0]
        raise EigensolverError(empty[0], f"no eigenvalue with |lambda| <= {lam_max}")
    return Spectrum(params, grid, tuple(modes), lam_cap=lam_max)


def extend_modes(spectrum: Spectrum, ell_max: int, driver: str = "auto") -> Spectrum:
    """Add modes up to ``ell_max`` solved with the same truncation as the existing ones."""
    if ell_max <= spectrum.ell_max:
        return spectrum
    params, grid = spectrum.params, spectrum.grid
    last = spectrum.modes[-1]
    new = []
    for ell in range(spectrum.ell_max + 1, ell_max + 1):
        op = assemble_mode_operator(params, grid, ell)
        if spectrum.lam_cap is not None:
            ms = solve_mode(op, lam_min=-spectrum.lam_cap, driver="stebz" if driver == "auto" else driver)
            if len(ms.lams) == 0:
                raise EigensolverError(ell, f"no eigenvalue with |lambda| <= {spectrum.lam_cap}")
        else:
            ms = solve_mode(op, None if last.complete else len(last.lams), driver=driver)
        new.append(ms)
    return Spectrum(params, grid, spectrum.modes + tuple(new), lam_cap=spectrum.lam_cap)


def solve_below(
    params: ProblemParams,
    grid: RadialGrid,
    lam_max: float,
    driver: str = "stebz",
    max_ell: int = 2000,
) -> Spectrum:
    """All eigenpairs with |lambda| <= lam_max, raising ell until a mode has none."""
    modes = []
    for ell in range(max_ell + 1):
        op = assemble_mode_operator(params, grid, ell)
        ms = solve_mode(op, lam_min=-lam_max, driver=driver)
        if len(ms.lams) == 0:
            break
        modes.append(ms)
    else:
        raise EigensolverError(max_ell, "ell_max limit reached before the counting window closed")
    if not modes:
        raise EigensolverError(0, f"no eigenvalue with |lambda| <= {lam_max}")
    return Spectrum(params, grid, tuple(modes), lam_cap=lam_max)


def _map(fn, items: Iterable, workers: int | None):
    items = list(items)
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def thread_count() -> int:
    import os

    env = os.environ.get("DEGENHEAT_THREADS")
    if env:
        return max(1, int(env))
    return 1


def ground_state(spectrum: Spectrum) -> EigenPair:
    """Top l = 0 eigenpair, positive at every interior node."""
    if not spectrum.modes or len(spectrum.modes[0].lams) == 0:
        raise ValueError("empty spectrum")
    m0 = spectrum.modes[0]
    phi = m0.phis[:, 0]
    interior = phi[:-1]
    if np.all(interior < 0):
        phi = -phi
        interior = -interior
    if not np.all(interior > 0):
        raise EigensolverError(0, "candidate ground state changes sign")
    return EigenPair(float(m0.lams[0]), DiscreteFunction(spectrum.grid, phi, 0), 0, 1, 1)


@dataclass(frozen=True)
class DecayFit:
    fitted_exponent: float
    window: tuple[float, float]
    residual: float
    n_points: int


def fit_decay(phi: DiscreteFunction | tuple[np.ndarray, np.ndarray], window: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares slope of log phi against log(1 + r) on ``window``.

    ``window`` defaults to (10, R/100) and must lie inside (1, R/2).
    """
    if isinstance(phi, DiscreteFunction):
        r, v = phi.grid.nodes, phi.values
    else:
        r, v = map(np.asarray, phi)
    R = float(r[-1])
    lo, hi = window if window is not None else (10.0, R / 100.0)
    if not (1.0 <= lo < hi <= R / 2):
        raise ValueError(f"window {lo, hi} must lie inside (1, R/2) with R={R}")
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 3:
        raise ValueError("fewer than 3 nodes in the fit window")
    if np.any(v[sel] <= 0):
        raise ValueError("nonpositive values in the fit window")
    x, y = np.log1p(r[sel]), np.log(v[sel])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / sel.sum())) if len(res) else 0.0
    return DecayFit(float(coef[0]), (float(lo), float(hi)), resid, int(sel.sum()))


def counting(spectrum: Spectrum, lam: float) -> int:
    """N(lambda): eigenvalues with |lambda_j| <= lambda, with multiplicity."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    ev = -spectrum.eigenvalues  # increasing
    k = np.searchsorted(ev, lam, side="right")
    return int(spectrum.multiplicities[:k].sum())


def counting_curve(spectrum: Spectrum, lams: Sequence[float]) -> np.ndarray:
    ev = -spectrum.eigenvalues
    cm = np.concatenate(([0], np.cumsum(spectrum.multiplicities)))
    return cm[np.searchsorted(ev, np.asarray(lams, dtype=float), side="right")]


def sturm_counting(params: ProblemParams, grid: RadialGrid, lam: float, max_ell: int = 10_000) -> int:
    """N(lambda) from Sturm sequences on the mode matrices (no eigenvectors)."""
    total = 0
    for ell in range(max_ell + 1):
        op = assemble_mode_operator(params, grid, ell)
        below = int(kernels.sturm_count(op.diag, op.offdiag, [-lam])[0])
        k = op.size - below
        if k == 0:
            return total
        total += harmonic_dimension(ell, params.dim) * k
    raise RuntimeError("max_ell reached")


@dataclass(frozen=True)
class WeylFit:
    slope: float
    window: tuple[float, float]
    count: int
    lams: np.ndarray
    counts: np.ndarray


class InsufficientEigenvalues(ValueError):
    pass


def weyl_fit(spectrum: Spectrum, min_count: int = 200, lo_frac: float = 0.1, n_points: int = 60) -> WeylFit:
    """Slope of log N(lambda) against log lambda over the reliable window."""
    hi = min(spectrum.complete_below(), spectrum.reliable_below())
    if not math.isfinite(hi):
        raise InsufficientEigenvalues("no bounded reliable window")
    # stay strictly below the cap so the top point is not a partial cluster
    hi = float(np.nextafter(hi, 0.0))
    count = int(counting(spectrum, hi))
    if count < min_count:
        raise InsufficientEigenvalues(f"only {count} reliable eigenvalues below {hi:.4g}; need {min_count}")
    lams = np.geomspace(lo_frac * hi, hi, n_points)
    counts = counting_curve(spectrum, lams)
    if np.any(counts == 0):
        raise InsufficientEigenvalues("window starts below the first eigenvalue")
    slope = np.polyfit(np.log(lams), np.log(counts), 1)[0]
    return WeylFit(float(slope), (float(lams[0]), hi), count, lams, counts)


def min_centrifugal_gap(params: ProblemParams, grid: RadialGrid) -> float:
    """min_i W(r_i)/r_i^2 over interior nodes: per-unit-c_l lower bound of |lambda_{l,1}| growth."""
    r = grid.nodes[:-1]
    return float(np.min(params.m(r) * growth(params, r) / r**2))


def lam1_upper(spectrum: Spectrum, ell: int) -> float:
    """Upper bound (most negative allowed) for lambda_{l,1}, l > ell_max, from the centrifugal term."""
    g = min_centrifugal_gap(spectrum.params, spectrum.grid)
    base = spectrum.modes[0].lams[0]
    return float(base - centrifugal(spectrum.params, ell) * g)

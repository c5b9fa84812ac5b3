"""Pure numpy/LAPACK versions of the hot kernels (fallback for ``_ckernels``)."""
from __future__ import annotations

import numpy as np
from scipy.linalg import lapack


def _pt_factor(diag, offdiag, tau):
    # I - tau*S is symmetric positive definite for negative definite S
    d = 1.0 - tau * np.asarray(diag, dtype=float)
    e = -tau * np.asarray(offdiag, dtype=float)
    df, ef, info = lapack.dpttrf(d, e)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal factorization failed (info={info})")
    return df, ef


def _pt_solve(df, ef, b):
    x, info = lapack.dpttrs(df, ef, b)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
    return x


def _tri_matvec(diag, offdiag, y):
    z = diag[:, None] * y
    z[:-1] += offdiag[:, None] * y[1:]
    z[1:] += offdiag[:, None] * y[:-1]
    return z


def cn_propagate(diag, offdiag, y0, dt, steps, n_implicit=2):
    """Crank-Nicolson for y' = S y with symmetric tridiagonal S.

    The first ``n_implicit // 2`` steps are each replaced by two backward
    Euler half steps (Rannacher start-up), which damps stiff components
    of rough data without losing second order.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    y = np.array(y0, dtype=float, copy=True)
    squeeze = y.ndim == 1
    if squeeze:
        y = y[:, None]
    y = np.asfortranarray(y)
    n_be = min(2 * steps, n_implicit - n_implicit % 2)
    if n_be:
        bf = _pt_factor(diag, offdiag, 0.5 * dt)
        for _ in range(n_be):
            y = _pt_solve(*bf, y)
    cf = _pt_factor(diag, offdiag, 0.5 * dt)
    for _ in range(steps - n_be // 2):
        y = _pt_solve(*cf, y + 0.5 * dt * _tri_matvec(diag, offdiag, y))
    return y[:, 0] if squeeze else y


def sturm_count(diag, offdiag, shifts):
    """Number of eigenvalues of the symmetric tridiagonal matrix below each shift."""
    d = np.asarray(diag, dtype=float)
    e2 = np.asarray(offdiag, dtype=float) ** 2
    s = np.atleast_1d(np.asarray(shifts, dtype=float))
    tiny = np.finfo(float).tiny ** 0.5
    count = np.zeros(s.shape, dtype=np.int64)
    q = d[0] - s
    q = np.where(q == 0.0, -tiny, q)
    count += q < 0
    for i in range(1, len(d)):
        q = d[i] - s - e2[i - 1] / q
        q = np.where(q == 0.0, -tiny, q)
        count += q < 0
    return count


def gegenbauer_table(ell_max, nu, t):
    """C_l^nu(t) for l = 0..ell_max by the three-term recurrence."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((ell_max + 1, t.size))
    out[0] = 1.0
    if ell_max >= 1:
        out[1] = 2.0 * nu * t
    for l in range(2, ell_max + 1):
        out[l] = (2.0 * t * (l + nu - 1.0) * out[l - 1] - (l + 2.0 * nu - 2.0) * out[l - 2]) / l
    return out


def oscillation_spacing(V, rel_floor=1e-8):
    """Smallest number of nodes per oscillation, per column of V.

    Sign changes among entries below ``rel_floor * max|v|`` are ignored.
    A column with fewer than two zeros reports twice its longest
    half-wave bounded by the ends; no zeros gives ``inf``.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    m, k = V.shape
    out = np.full(k, np.inf)
    scale = np.max(np.abs(V), axis=0)
    for j in range(k):
        v = V[:, j]
        keep = np.nonzero(np.abs(v) > rel_floor * scale[j])[0]
        if keep.size < 2:
            continue
        s = np.signbit(v[keep])
        z = keep[1:][s[1:] != s[:-1]]
        if z.size >= 2:
            out[j] = 2.0 * np.min(np.diff(z))
        elif z.size == 1:
            out[j] = 2.0 * max(z[0], m - z[0])
    return out

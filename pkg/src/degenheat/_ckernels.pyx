# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()


cdef int _factor(const double[::1] d, const double[::1] e, double tau,
                 double[::1] piv, double[::1] low) noexcept nogil:
    # LDL^T of I - tau*S: piv = D, low = L subdiagonal
    cdef Py_ssize_t m = d.shape[0], i
    piv[0] = 1.0 - tau * d[0]
    if piv[0] <= 0.0:
        return 1
    for i in range(1, m):
        low[i - 1] = -tau * e[i - 1] / piv[i - 1]
        piv[i] = 1.0 - tau * d[i] - low[i - 1] * (-tau * e[i - 1])
        if piv[i] <= 0.0:
            return <int>(i + 1)
    return 0


cdef void _solve(const double[::1] piv, const double[::1] low, double[::1] x) noexcept nogil:
    cdef Py_ssize_t m = piv.shape[0], i
    for i in range(1, m):
        x[i] -= low[i - 1] * x[i - 1]
    x[m - 1] /= piv[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = x[i] / piv[i] - low[i] * x[i + 1]


def cn_propagate(diag, offdiag, y0, double dt, int steps, int n_implicit=2):
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(offdiag, dtype=np.float64)
    Y = np.array(y0, dtype=np.float64, copy=True)
    squeeze = Y.ndim == 1
    if squeeze:
        Y = Y[:, None]
    Yt = np.ascontiguousarray(Y.T)
    cdef double[:, ::1] yv = Yt
    cdef Py_ssize_t m = d.shape[0], k = yv.shape[0], j, i, s
    cdef double[::1] piv = np.empty(m), low = np.empty(max(m - 1, 1))
    cdef double[::1] tmp = np.empty(m)
    cdef int n_be = min(2 * steps, n_implicit - n_implicit % 2)
    cdef int n_cn = steps - n_be // 2
    cdef double h = 0.5 * dt
    cdef int info
    with nogil:
        info = _factor(d, e, h, piv, low)
    if info:
        raise np.linalg.LinAlgError(f"tridiagonal factorization failed (info={info})")
    with nogil:
        for j in range(k):
            for s in range(n_be):
                _solve(piv, low, yv[j])
            for s in range(n_cn):
                for i in range(m):
                    tmp[i] = yv[j, i] + h * d[i] * yv[j, i]
                for i in range(m - 1):
                    tmp[i] += h * e[i] * yv[j, i + 1]
                    tmp[i + 1] += h * e[i] * yv[j, i]
                _solve(piv, low, tmp)
                for i in range(m):
                    yv[j, i] = tmp[i]
    out = np.ascontiguousarray(Yt.T)
    return out[:, 0] if squeeze else out


def sturm_count(diag, offdiag, shifts):
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(offdiag, dtype=np.float64)
    s_arr = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    cdef const double[::1] s = np.ascontiguousarray(s_arr.ravel())
    out = np.zeros(s.shape[0], dtype=np.int64)
    cdef cnp.int64_t[::1] cnt = out
    cdef Py_ssize_t m = d.shape[0], i, j
    cdef double q, tiny = 1.4916681462400413e-154
    with nogil:
        for j in range(s.shape[0]):
            q = d[0] - s[j]
            if q == 0.0:
                q = -tiny
            if q < 0.0:
                cnt[j] += 1
            for i in range(1, m):
                q = d[i] - s[j] - e[i - 1] * e[i - 1] / q
                if q == 0.0:
                    q = -tiny
                if q < 0.0:
                    cnt[j] += 1
    return out.reshape(s_arr.shape)


def gegenbauer_table(int ell_max, double nu, t):
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64)).ravel()
    cdef const double[::1] tv = np.ascontiguousarray(t_arr)
    out = np.empty((ell_max + 1, tv.shape[0]))
    cdef double[:, ::1] c = out
    cdef Py_ssize_t l, j
    with nogil:
        for j in range(tv.shape[0]):
            c[0, j] = 1.0
            if ell_max >= 1:
                c[1, j] = 2.0 * nu * tv[j]
            for l in range(2, ell_max + 1):
                c[l, j] = (2.0 * tv[j] * (l + nu - 1.0) * c[l - 1, j]
                           - (l + 2.0 * nu - 2.0) * c[l - 2, j]) / l
    return out


def oscillation_spacing(V, double rel_floor=1e-8):
    A = np.asarray(V, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    cdef const double[::1, :] v = np.asfortranarray(A)
    cdef Py_ssize_t m = v.shape[0], k = v.shape[1], i, j, last, first, nz
    out = np.full(k, np.inf)
    cdef double[::1] o = out
    cdef double scale, floor_, best
    cdef int sgn, prev
    with nogil:
        for j in range(k):
            scale = 0.0
            for i in range(m):
                if fabs(v[i, j]) > scale:
                    scale = fabs(v[i, j])
            floor_ = rel_floor * scale
            prev = 0
            last = -1
            first = -1
            nz = 0
            best = INFINITY
            for i in range(m):
                if fabs(v[i, j]) <= floor_:
                    continue
                sgn = 1 if v[i, j] > 0.0 else -1
                if prev != 0 and sgn != prev:
                    nz += 1
                    if last >= 0 and 2.0 * (i - last) < best:
                        best = 2.0 * (i - last)
                    if first < 0:
                        first = i
                    last = i
                prev = sgn
            if nz >= 2:
                o[j] = best
            elif nz == 1:
                o[j] = 2.0 * (first if first > m - first else m - first)
    return out

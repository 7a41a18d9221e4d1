# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backend for the accelerated proximal-gradient loop.

Fuses the per-iteration vector work (prox, objective, momentum, stopping
tests) into C loops and drives the matrix-vector products through BLAS
zgemv directly, avoiding temporary arrays.  Mirrors ``_fista_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemv

cnp.import_array()

ctypedef double complex zcomplex


cdef inline double cmag(zcomplex v) nogil:
    return sqrt(v.real * v.real + v.imag * v.imag)


cdef void _residual(zcomplex[:, ::1] A, zcomplex[::1] v, zcomplex[::1] y,
                    zcomplex[::1] out, zcomplex[::1] work, int M, int N) noexcept:
    """out = y - A @ v (two steps, mirroring the numpy backend).

    A is C-contiguous; reading it as a Fortran (N, M) block and asking BLAS
    for the transposed product keeps zgemv on its fast dot-product kernels.
    """
    cdef char trans = b'T'
    cdef int inc = 1
    cdef zcomplex alpha = 1.0
    cdef zcomplex beta = 0.0
    cdef Py_ssize_t i
    zgemv(&trans, &N, &M, &alpha, &A[0, 0], &N, &v[0], &inc, &beta, &work[0], &inc)
    for i in range(M):
        out[i] = y[i] - work[i]


cdef void _adjoint(zcomplex[:, ::1] AH, zcomplex[::1] r, zcomplex[::1] out,
                   double scale, int M, int N) noexcept:
    """out = scale * AH @ r for the precomputed C-contiguous (N, M) adjoint."""
    cdef char trans = b'T'
    cdef int inc = 1
    cdef zcomplex alpha = scale
    cdef zcomplex beta = 0.0
    zgemv(&trans, &M, &N, &alpha, &AH[0, 0], &M, &r[0], &inc, &beta, &out[0], &inc)


cdef double _prox_objective(zcomplex[::1] z, zcomplex[::1] g, zcomplex[::1] xn,
                            double thr, double lam, Py_ssize_t N) noexcept nogil:
    """xn = soft-threshold(z + g, thr); returns lam * sum |xn|."""
    cdef Py_ssize_t i
    cdef zcomplex h
    cdef double mag, pen = 0.0
    for i in range(N):
        h = z[i] + g[i]
        mag = cmag(h)
        if mag > thr:
            xn[i] = h * (1.0 - thr / mag)
            pen += cmag(xn[i])
        else:
            xn[i] = 0.0
    return lam * pen


cdef double _half_sqnorm(zcomplex[::1] r, Py_ssize_t M) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(M):
        acc += r[i].real * r[i].real + r[i].imag * r[i].imag
    return 0.5 * acc


cdef double _kkt(zcomplex[::1] x, zcomplex[::1] g, double lam, Py_ssize_t N) noexcept nogil:
    cdef Py_ssize_t i
    cdef double worst = 0.0, mag, v
    cdef zcomplex d
    for i in range(N):
        mag = cmag(x[i])
        if mag > 0.0:
            d = g[i] - lam * (x[i] / mag)
            v = cmag(d)
        else:
            v = cmag(g[i]) - lam
            if v < 0.0:
                v = 0.0
        if v > worst:
            worst = v
    return worst


def fista_loop(zcomplex[:, ::1] A, zcomplex[:, ::1] AH, zcomplex[::1] y,
               double lam, double step, int max_iter, double tol_rel,
               double tol_kkt, bint accelerate):
    """Compiled twin of ``_fista_py.fista_loop``.

    A is the (M, N) matrix and AH its conjugate transpose, both
    C-contiguous; products run through zgemv's transposed fast path.
    """
    cdef int M = A.shape[0]
    cdef int N = A.shape[1]
    cdef cnp.ndarray x_arr = np.zeros(N, dtype=complex)
    cdef cnp.ndarray xn_arr = np.empty(N, dtype=complex)
    cdef cnp.ndarray z_arr = np.zeros(N, dtype=complex)
    cdef cnp.ndarray g_arr = np.empty(N, dtype=complex)
    cdef cnp.ndarray r_arr = np.empty(M, dtype=complex)
    cdef cnp.ndarray rp_arr = np.empty(M, dtype=complex)
    cdef cnp.ndarray work_arr = np.empty(M, dtype=complex)
    cdef cnp.ndarray trace_arr = np.empty(max_iter)
    cdef zcomplex[::1] x = x_arr, xn = xn_arr, z = z_arr, g = g_arr
    cdef zcomplex[::1] r = r_arr, r_prev = rp_arr, work = work_arr
    cdef double[::1] trace = trace_arr

    cdef double thr = step * lam
    cdef double t = 1.0, tn, coef
    cdef double fx = 0.0, fn, rel, kkt, monitor
    cdef double diff2, xn2, dr, di
    cdef Py_ssize_t i
    cdef int k
    cdef zcomplex tmp

    for i in range(M):
        fx += y[i].real * y[i].real + y[i].imag * y[i].imag
        r_prev[i] = y[i]
    fx *= 0.5
    monitor = fx

    for k in range(max_iter):
        _residual(A, z, y, r, work, M, N)
        _adjoint(AH, r, g, step, M, N)
        fn = _prox_objective(z, g, xn, thr, lam, N)
        _residual(A, xn, y, r, work, M, N)
        fn += _half_sqnorm(r, M)
        if fn > fx:
            for i in range(N):
                z[i] = x[i]
            _residual(A, z, y, r, work, M, N)
            _adjoint(AH, r, g, step, M, N)
            fn = _prox_objective(z, g, xn, thr, lam, N)
            _residual(A, xn, y, r, work, M, N)
            fn += _half_sqnorm(r, M)
            t = 1.0

        diff2 = 0.0
        xn2 = 0.0
        for i in range(N):
            tmp = xn[i]
            dr = tmp.real - x[i].real
            di = tmp.imag - x[i].imag
            diff2 += dr * dr + di * di
            xn2 += tmp.real * tmp.real + tmp.imag * tmp.imag
        rel = sqrt(diff2) / max(sqrt(xn2), 1e-300)
        if rel <= tol_rel:
            _adjoint(AH, r_prev, g, 1.0, M, N)
            kkt = _kkt(x, g, lam, N)
            if kkt <= tol_kkt:
                return x_arr, k, trace_arr[:k].copy(), kkt, True

        if accelerate:
            tn = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
            coef = (t - 1.0) / tn
            t = tn
        else:
            coef = 0.0
        for i in range(N):
            tmp = xn[i]
            z[i] = tmp + coef * (tmp - x[i])
            x[i] = tmp
        for i in range(M):
            r_prev[i] = r[i]
        fx = fn
        if fn < monitor:
            monitor = fn
        trace[k] = monitor

    _residual(A, x, y, r, work, M, N)
    _adjoint(AH, r, g, 1.0, M, N)
    kkt = _kkt(x, g, lam, N)
    return x_arr, max_iter, trace_arr.copy(), kkt, False

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: load map, load fixed point, per-cell bisection and power sweeps.

Same signatures and semantics as ``_pykernels``.
"""
import numpy as np
from libc.math cimport log1p, fabs, isfinite
from libc.stdint cimport int64_t

from .errors import DomainError

CONVERGED, MAX_ITER, BLOWUP = 0, 1, 2

cdef enum:
    _CONVERGED = 0
    _MAX_ITER = 1
    _BLOWUP = 2


cdef void _denominator(const double[:, ::1] G, const double[::1] x,
                       const double[::1] p, double sigma2,
                       double[::1] denom) noexcept nogil:
    cdef Py_ssize_t n = G.shape[0], U = G.shape[1], k, j
    cdef double w
    for j in range(U):
        denom[j] = sigma2
    for k in range(n):
        w = p[k] * x[k]
        if w != 0.0:
            for j in range(U):
                denom[j] += w * G[k, j]


cdef Py_ssize_t _load_map(const double[:, ::1] G, const double[::1] gs,
                          const int64_t[::1] owner, const double[::1] rates,
                          const double[::1] x, const double[::1] p, double sigma2,
                          double[::1] denom, double[::1] out) noexcept nogil:
    # returns -1 on success, else the offending user index (sign-coded)
    cdef Py_ssize_t n = G.shape[0], U = G.shape[1], i, j
    cdef double c
    _denominator(G, x, p, sigma2, denom)
    for i in range(n):
        out[i] = 0.0
    for j in range(U):
        if not denom[j] > 0.0:
            return j
        if rates[j] > 0.0:
            c = log1p(p[owner[j]] * gs[j] / denom[j])
            if not c > 0.0:
                return U + j
            out[owner[j]] += rates[j] / c
    return -1


cdef _raise_domain(Py_ssize_t code, Py_ssize_t U):
    if code < U:
        raise DomainError(f"user {code}: noise plus interference is zero, SINR undefined")
    raise DomainError(f"user {code - U}: zero rate capacity (serving power or gain is zero)")


def load_map(const double[:, ::1] G_int, const double[::1] gs, const int64_t[::1] owner,
             const double[::1] rates, const double[::1] x, const double[::1] p,
             double sigma2):
    cdef Py_ssize_t code
    denom = np.empty(G_int.shape[1])
    out = np.empty(G_int.shape[0])
    code = _load_map(G_int, gs, owner, rates, x, p, sigma2, denom, out)
    if code >= 0:
        _raise_domain(code, G_int.shape[1])
    return out


def ial(const double[:, ::1] G_int, const double[::1] gs, const int64_t[::1] owner,
        const double[::1] rates, const double[::1] p, double sigma2,
        const double[::1] x0, double tol, Py_ssize_t max_iter, double blowup):
    cdef Py_ssize_t n = G_int.shape[0], i, it, code = -1, status = _MAX_ITER
    cdef double res, d, top
    cdef bint finite
    x_arr = np.array(x0, dtype=float)
    fx_arr = np.empty(n)
    denom_arr = np.empty(G_int.shape[1])
    trace_arr = np.empty(max_iter)
    cdef double[::1] x = x_arr, fx = fx_arr, denom = denom_arr, trace = trace_arr
    it = 0
    with nogil:
        while it < max_iter:
            code = _load_map(G_int, gs, owner, rates, x, p, sigma2, denom, fx)
            if code >= 0:
                break
            res = 0.0
            top = 0.0
            finite = True
            for i in range(n):
                d = fabs(fx[i] - x[i])
                if d > res:
                    res = d
                if fx[i] > top:
                    top = fx[i]
                if not isfinite(fx[i]):
                    finite = False
            trace[it] = res
            it += 1
            if res <= tol:
                status = _CONVERGED
                break
            if not finite or top > blowup:
                status = _BLOWUP
                x[:] = fx
                break
            x[:] = fx
    if code >= 0:
        _raise_domain(code, G_int.shape[1])
    return x_arr, int(it), trace_arr[:it].copy(), int(status)


cdef inline double _eta(const double[::1] a, const double[::1] b, double p) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(a.shape[0]):
        s += a[j] / log1p(p * b[j])
    return s


cdef int _cell_power(const double[::1] a, const double[::1] b, double p_start,
                     double tol, double p_max, double *out) noexcept nogil:
    # 0: root found, 1: root lies above p_max, -1: eta <= 1 as power vanishes
    cdef double p, e, lo, hi, mid
    if p_start > 0.0:
        p = p_start if p_start < p_max else p_max
    else:
        p = 1.0 if 1.0 < p_max else p_max
    e = _eta(a, b, p)
    if fabs(e - 1.0) <= tol:
        out[0] = p
        return 0
    if e > 1.0:
        lo = p
        while True:
            hi = 2.0 * lo
            if hi > p_max:
                hi = p_max
            e = _eta(a, b, hi)
            if e <= 1.0:
                break
            if hi >= p_max:
                out[0] = p_max
                return 1
            lo = hi
    else:
        hi = p
        while True:
            lo = 0.5 * hi
            if lo <= 0.0:
                return -1
            e = _eta(a, b, lo)
            if e > 1.0:
                break
            hi = lo
    if fabs(e - 1.0) <= tol:
        out[0] = hi if e <= 1.0 else lo
        return 0
    p = 0.5 * (lo + hi)
    while True:
        e = _eta(a, b, p)
        if fabs(e - 1.0) <= tol:
            break
        if e <= 1.0:
            hi = p
        else:
            lo = p
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        p = mid
    out[0] = p
    return 0


def eta(const double[::1] a, const double[::1] b, double p):
    return _eta(a, b, p)


def cell_power(const double[::1] a, const double[::1] b, double p_start,
               double tol, double p_max):
    cdef double out = 0.0
    cdef int status = _cell_power(a, b, p_start, tol, p_max, &out)
    if status < 0:
        raise DomainError("eta stays below one as power vanishes")
    return out, bool(status)


def iap_sweep(const double[:, ::1] G_int, const double[::1] gs, const int64_t[::1] owner,
              const int64_t[::1] cell_ptr, const int64_t[::1] cell_users,
              const double[::1] rates, const double[::1] x_t, const double[::1] p,
              double sigma2, bint asynchronous, const int64_t[::1] order,
              double tol, const double[::1] p_max):
    cdef Py_ssize_t n = G_int.shape[0], U = G_int.shape[1]
    cdef Py_ssize_t idx, i, j, m, start, stop
    cdef int status = 0
    cdef double pi = 0.0, delta
    p_arr = np.array(p, dtype=float)
    hit_arr = np.zeros(n, dtype=np.uint8)
    denom_arr = np.empty(U)
    a_arr = np.empty(U)
    b_arr = np.empty(U)
    cdef double[::1] p_new = p_arr, denom = denom_arr, a = a_arr, b = b_arr
    cdef unsigned char[::1] hit = hit_arr
    with nogil:
        _denominator(G_int, x_t, p, sigma2, denom)
        for idx in range(order.shape[0]):
            i = order[idx]
            start = cell_ptr[i]
            stop = cell_ptr[i + 1]
            for m in range(stop - start):
                j = cell_users[start + m]
                a[m] = rates[j] / x_t[i]
                b[m] = gs[j] / denom[j]
            status = _cell_power(a[:stop - start], b[:stop - start], p[i], tol,
                                 p_max[i], &pi)
            if status < 0:
                break
            hit[i] = status
            if asynchronous:
                delta = (pi - p_new[i]) * x_t[i]
                if delta != 0.0:
                    for j in range(U):
                        denom[j] += delta * G_int[i, j]
            p_new[i] = pi
    if status < 0:
        raise DomainError(f"cell {i}: eta stays below one as power vanishes")
    return p_arr, hit_arr.astype(bool)

"""Pure numpy implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function; used when the compiled
extension is unavailable and as the reference in backend-equivalence tests.
"""
import numpy as np

from .errors import DomainError

CONVERGED, MAX_ITER, BLOWUP = 0, 1, 2


def _denominator(G_int, x, p, sigma2):
    return (p * x) @ G_int + sigma2


def load_map(G_int, gs, owner, rates, x, p, sigma2):
    denom = _denominator(G_int, x, p, sigma2)
    if not np.all(denom > 0):
        j = int(np.flatnonzero(~(denom > 0))[0])
        raise DomainError(f"user {j}: noise plus interference is zero, SINR undefined")
    capacity = np.log1p(p[owner] * gs / denom)
    bad = (rates > 0) & ~(capacity > 0)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise DomainError(f"user {j}: zero rate capacity (serving power or gain is zero)")
    terms = np.divide(rates, capacity, out=np.zeros_like(rates), where=rates > 0)
    return np.bincount(owner, weights=terms, minlength=G_int.shape[0])


def ial(G_int, gs, owner, rates, p, sigma2, x0, tol, max_iter, blowup):
    x = np.array(x0, dtype=float)
    trace = []
    for it in range(1, max_iter + 1):
        fx = load_map(G_int, gs, owner, rates, x, p, sigma2)
        res = float(np.max(np.abs(fx - x)))
        trace.append(res)
        if res <= tol:
            return x, it, np.array(trace), CONVERGED
        if not np.all(np.isfinite(fx)) or fx.max() > blowup:
            return fx, it, np.array(trace), BLOWUP
        x = fx
    return x, max_iter, np.array(trace), MAX_ITER


def eta(a, b, p):
    return float(np.sum(a / np.log1p(p * b)))


def cell_power(a, b, p_start, tol, p_max):
    """Root of ``eta(p) = 1`` by bracketing then bisection.

    Returns ``(p, hit)``; ``hit`` is true when ``eta(p_max) > 1`` so that the
    root lies above ``p_max`` and ``p_max`` is returned instead.
    """
    p = min(p_start, p_max) if p_start > 0 else min(1.0, p_max)
    e = eta(a, b, p)
    if abs(e - 1.0) <= tol:
        return p, False
    if e > 1.0:
        lo = p
        while True:
            hi = min(2.0 * lo, p_max)
            e = eta(a, b, hi)
            if e <= 1.0:
                break
            if hi >= p_max:
                return p_max, True
            lo = hi
    else:
        hi = p
        while True:
            lo = 0.5 * hi
            if lo <= 0.0:
                raise DomainError("eta stays below one as power vanishes")
            e = eta(a, b, lo)
            if e > 1.0:
                break
            hi = lo
    if abs(e - 1.0) <= tol:
        return (hi if e <= 1.0 else lo), False
    p = 0.5 * (lo + hi)
    while True:
        e = eta(a, b, p)
        if abs(e - 1.0) <= tol:
            return p, False
        if e <= 1.0:
            hi = p
        else:
            lo = p
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            return p, False
        p = mid


def iap_sweep(G_int, gs, owner, cell_ptr, cell_users, rates, x_t, p, sigma2,
              asynchronous, order, tol, p_max):
    p_new = np.array(p, dtype=float)
    denom = _denominator(G_int, x_t, p, sigma2)
    hit = np.zeros(len(p_new), dtype=bool)
    for i in order:
        users = cell_users[cell_ptr[i]:cell_ptr[i + 1]]
        a = rates[users] / x_t[i]
        b = gs[users] / denom[users]
        pi, hit[i] = cell_power(a, b, p[i], tol, p_max[i])
        if asynchronous:
            denom += (pi - p_new[i]) * x_t[i] * G_int[i]
        p_new[i] = pi
    return p_new, hit

"""Rate satisfiability: the coupling matrix and its spectral radius.

A per-user rate vector ``r`` admits a unique positive load for every positive
power exactly when the Perron root of the coupling matrix is below one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import Network

#: Margin below one required to call a rate vector satisfiable.
SATISFIABILITY_MARGIN = 1e-12


@dataclass(frozen=True)
class SpectralRadius:
    rho: float
    iterations: int
    converged: bool
    lower: float
    upper: float


@dataclass(frozen=True)
class SatisfiabilityReport:
    rho: float
    satisfiable: bool
    iterations: int
    converged: bool = True


def build_lambda(net: Network, r) -> np.ndarray:
    """Coupling matrix with ``lam[i, k] = sum_{j in J_i} g[k, j] * r_j / g[i, j]``, zero diagonal."""
    r = net.user_vector(r)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("rates must be finite and non-negative")
    weighted = net.interference_gains * (r / net.serving_gain)
    lam = np.zeros((net.n, net.n))
    # column k of lam^T accumulates the users of cell i
    np.add.at(lam, net.owner, weighted.T)
    np.fill_diagonal(lam, 0.0)
    return lam


def _gelfand(m, k):
    """``||m^k||_inf ** (1/k)`` by repeated squaring, rescaled against overflow; ``k`` a power of two."""
    a = np.array(m, dtype=float)
    log_scale = 0.0
    steps = int(np.log2(k))
    for _ in range(steps):
        s = np.abs(a).sum(axis=1).max()
        if s == 0:
            return 0.0
        a = a / s
        log_scale = 2.0 * (log_scale + np.log(s))
        a = a @ a
    s = np.abs(a).sum(axis=1).max()
    if s == 0:
        return 0.0
    return float(np.exp((log_scale + np.log(s)) / k))


def spectral_radius(m, tol: float = 1e-12, max_iter: int = 100_000) -> SpectralRadius:
    """Perron root of a non-negative square matrix.

    Power iteration from the all-ones vector on ``m + s*I`` (``s`` half the
    largest row sum). The shift makes the Perron root strictly dominant for
    irreducible ``m`` and keeps iterates positive, so the Collatz-Wielandt
    ratios ``min/max (Av)_i / v_i`` bracket the root at every step. If the
    bracket stalls open (reducible block structure) the estimate falls back
    to the power-iteration norm ratio, capped by Gelfand bounds at k=32, 64.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise DomainError("matrix must be finite and non-negative")
    n = m.shape[0]
    rows = m.sum(axis=1)
    if n == 0 or rows.max() == 0.0:
        return SpectralRadius(0.0, 0, True, 0.0, 0.0)
    shift = 0.5 * rows.max()
    a = m + shift * np.eye(n)
    v = np.ones(n)
    lo, hi = 0.0, np.inf
    history = []
    est = 0.0
    for it in range(1, max_iter + 1):
        w = a @ v
        ratios = w / v
        lo = max(lo, ratios.min())
        hi = min(hi, ratios.max())
        top = w.max()
        est = top  # v is normalized to max 1
        if hi - lo <= tol * max(1.0, hi):
            rho = 0.5 * (lo + hi) - shift
            return SpectralRadius(max(float(rho), 0.0), it, True,
                                  max(float(lo - shift), 0.0), float(hi - shift))
        history.append(est)
        if it % 500 == 0 and _gelfand(m, 64) - (lo - shift) <= tol * max(1.0, hi):
            break
        if it > 200 and abs(est - history[-101]) <= tol * max(1.0, est):
            break
        v = np.maximum(w / top, 1e-300)
    upper = min(hi - shift, _gelfand(m, 32), _gelfand(m, 64))
    lower = min(max(float(lo - shift), 0.0), upper)
    rho = min(max(float(est - shift), lower), upper)
    return SpectralRadius(rho, it, bool(upper - lower <= tol * max(1.0, upper)),
                          lower, float(upper))


def is_satisfiable(net: Network, r, tol: float = 1e-12,
                   max_iter: int = 100_000) -> SatisfiabilityReport:
    """Strict test ``rho(Lambda(r)) < 1 - SATISFIABILITY_MARGIN``."""
    sr = spectral_radius(build_lambda(net, r), tol=tol, max_iter=max_iter)
    ok = sr.rho < 1.0 - SATISFIABILITY_MARGIN
    return SatisfiabilityReport(sr.rho, bool(ok), sr.iterations, sr.converged)

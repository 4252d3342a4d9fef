"""Power for a given target load: the power coupling fixed point ``p = h(p; x, r)``.

Each component ``h_i`` has no closed form. It is the unique root of the
strictly decreasing per-cell function

    eta_i(p_i) = sum_{j in J_i} a_ij / log(1 + p_i * b_ij),
    a_ij = r_ij / x_i,   b_ij = g_ij / (sum_{k != i} p_k g_kj x_k + sigma^2),

found by bracketing and bisection. ``h`` is a standard interference function,
so synchronous and asynchronous sweeps both converge to the same fixed point
whenever one exists.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, PowerDivergenceError, UnsatisfiableError
from .feasibility import is_satisfiable
from .load_solver import SolveReport, Termination
from .model import Network, load_map

DIVERGENCE_POWER = 1e6


class Mode(str, enum.Enum):
    SYNCHRONOUS = "synchronous"
    ASYNCHRONOUS = "asynchronous"


@dataclass(frozen=True)
class EtaContext:
    """Per-cell data for ``eta_i``: demand weights ``a`` and gain-to-interference ratios ``b``."""
    cell: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size == 0:
            raise DomainError("a and b must be non-empty vectors of equal length")
        if np.any(a < 0) or not np.any(a > 0) or np.any(b <= 0):
            raise DomainError("need a >= 0 with some a > 0, and b > 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_network(cls, net: Network, i: int, p, x, r) -> "EtaContext":
        """Context of cell ``i`` given the other cells' powers (``p[i]`` is ignored)."""
        net.require_noise()
        p = net.cell_vector(p, "power")
        x = net.cell_vector(x, "load")
        r = net.user_vector(r)
        if x[i] <= 0:
            raise DomainError(f"target load of cell {i} must be positive")
        users = list(net.users[i])
        w = p * x
        w[i] = 0.0
        denom = w @ net.gains[:, users] + net.noise_power
        return cls(i, r[users] / x[i], net.gains[i, users] / denom)


@dataclass(frozen=True)
class IapOptions:
    """Options for the power iteration.

    ``outer_tol`` bounds the infinity-norm gap between realized and target
    load; ``inner_tol`` bounds ``|eta_i - 1|`` in each bisection. ``p_cap``
    switches to the capped map ``min(h_i, cap_i)``. ``divergence_power`` is the
    threshold above which the target load is declared not implementable.
    """
    mode: Mode = Mode.ASYNCHRONOUS
    outer_tol: float = 1e-5
    inner_tol: float = 1e-9
    max_outer: int = 10_000
    p0: object = 1.0
    p_cap: Optional[object] = None
    divergence_power: float = DIVERGENCE_POWER
    order: Optional[Sequence[int]] = None
    check_rates: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (self.outer_tol > 0 and self.inner_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_outer < 1:
            raise DomainError("max_outer must be at least 1")
        if not self.divergence_power > 0:
            raise DomainError("divergence_power must be positive")
        if np.any(np.asarray(self.p0, dtype=float) <= 0):
            raise DomainError("initial power must be strictly positive")
        if self.p_cap is not None and np.any(np.asarray(self.p_cap, dtype=float) <= 0):
            raise DomainError("power caps must be strictly positive")


def eta(ctx: EtaContext, p_i: float) -> float:
    if not p_i > 0:
        raise DomainError(f"eta is defined for positive power, got {p_i}")
    return kernels.eta(ctx.a, ctx.b, p_i)


def solve_cell_power(ctx: EtaContext, inner_tol: float = 1e-9, p_start: float = 1.0,
                     divergence_power: float = DIVERGENCE_POWER) -> float:
    """Unique ``p_i`` with ``|eta_i(p_i) - 1| <= inner_tol``, i.e. ``h_i`` for this context."""
    p, hit = kernels.cell_power(ctx.a, ctx.b, p_start, inner_tol, divergence_power)
    if hit:
        raise PowerDivergenceError(
            f"cell {ctx.cell}: eta stays above one up to {divergence_power:g} W")
    return p


def interference_map(net: Network, p, x, r, inner_tol: float = 1e-9,
                     divergence_power: float = DIVERGENCE_POWER) -> np.ndarray:
    """Evaluate ``h(p; x, r)``: every component from the same input vector.

    Each bisection starts from 1 W, so ``h_i`` depends on ``p`` only through
    the other cells' powers.
    """
    net.require_noise()
    p = net.cell_vector(p, "power")
    x = net.cell_vector(x, "load")
    r = net.user_vector(r)
    if np.any(x <= 0):
        raise DomainError("load must be strictly positive")
    denom = (p * x) @ net.interference_gains + net.noise_power
    h = np.empty(net.n)
    for i in range(net.n):
        users = net.cell_users[net.cell_ptr[i]:net.cell_ptr[i + 1]]
        h[i], hit = kernels.cell_power(r[users] / x[i], net.serving_gain[users] / denom[users],
                                       1.0, inner_tol, divergence_power)
        if hit:
            raise PowerDivergenceError(
                f"cell {i}: eta stays above one up to {divergence_power:g} W")
    return h


def _realized(net, x_t, r, p):
    return load_map(net, x_t, p, r)


def iap(net: Network, x_target, r, opts: Optional[IapOptions] = None):
    """Iterative algorithm for power.

    Starting from ``opts.p0`` each outer iteration replaces every cell's power
    by ``h_i`` (all cells from the previous vector in synchronous mode, in
    sweep order with immediate reuse in asynchronous mode), then re-evaluates
    the realized load ``f(x_target; r, p)``. Stops when the realized load is
    within ``outer_tol`` of the target (infinity norm).

    Returns ``(p, report)``. ``report.termination`` is ``infeasible_detected``
    when some power crosses ``divergence_power`` or the iteration cap is hit
    while powers are still growing; the load is then not implementable.
    """
    opts = opts or IapOptions()
    net.require_noise()
    x_t = net.cell_vector(x_target, "target load")
    r = net.user_vector(r)
    if np.any(x_t <= 0):
        raise DomainError("target load must be strictly positive")
    if np.any(r < 0):
        raise DomainError("rates must be non-negative")
    served = np.bincount(net.owner, weights=(r > 0).astype(float), minlength=net.n)
    if np.any(served == 0):
        raise DomainError(
            f"cell {int(np.flatnonzero(served == 0)[0])} has no positive rate; "
            "its load cannot reach a positive target")
    if opts.check_rates:
        sat = is_satisfiable(net, r)
        if not sat.satisfiable:
            raise UnsatisfiableError(
                f"rates are not satisfiable: spectral radius {sat.rho:.6g} >= 1", sat.rho)

    div = float(opts.divergence_power)
    capped = np.zeros(net.n, dtype=bool)
    p_max = np.full(net.n, div)
    if opts.p_cap is not None:
        cap = net.cell_vector(opts.p_cap, "power cap")
        capped = cap <= div
        p_max = np.minimum(cap, div)
    p = np.minimum(net.cell_vector(opts.p0, "initial power"), p_max)
    order = np.arange(net.n) if opts.order is None else np.asarray(opts.order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(net.n)):
        raise DomainError("sweep order must be a permutation of the cell indices")
    asynchronous = opts.mode is Mode.ASYNCHRONOUS

    pinned = np.zeros(net.n, dtype=bool)
    fx = _realized(net, x_t, r, p)
    residuals = [float(np.max(np.abs(fx - x_t)))]
    distances = [float(np.linalg.norm(fx - x_t))]
    growing = []
    termination = None
    it = 0
    while residuals[-1] > opts.outer_tol:
        if it >= opts.max_outer:
            stuck = len(growing) >= 10 and all(growing[-10:])
            termination = Termination.INFEASIBLE if stuck else Termination.MAX_ITER
            break
        p_new, hit = kernels.iap_sweep(
            net.interference_gains, net.serving_gain, net.owner, net.cell_ptr,
            net.cell_users, r, x_t, p, net.noise_power, asynchronous, order,
            opts.inner_tol, p_max)
        it += 1
        growing.append(bool(np.all(p_new >= p) and np.any(p_new > p)))
        p = p_new
        if np.any(hit & ~capped):
            termination = Termination.INFEASIBLE
            break
        pinned = hit & capped
        fx = _realized(net, x_t, r, p)
        gap = np.abs(fx - x_t)
        # a pinned cell is settled once its power cap leaves its load at or above target
        gap[pinned] = np.maximum(x_t[pinned] - fx[pinned], 0.0)
        residuals.append(float(gap.max()))
        distances.append(float(np.linalg.norm(fx - x_t)))
    else:
        termination = Termination.CONVERGED

    report = SolveReport(p, it, residuals, termination, distances, fx,
                         tuple(int(i) for i in np.flatnonzero(pinned)))
    return p, report


def iap_capped(net: Network, x_target, r, opts: IapOptions):
    """IAP with per-cell power caps; cells held at their cap are listed in ``report.pinned``."""
    if opts.p_cap is None:
        raise DomainError("iap_capped needs opts.p_cap")
    return iap(net, x_target, r, opts)

"""Minimum-energy operating point, the uniform-power baseline, and experiment sweeps.

Full load ``x = 1`` is energy-optimal whenever it is implementable, and the
optimal rates equal the minimum demands; the optimal power is then the power
coupling fixed point at full load.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import LoadCouplingError, NotImplementableError, UnsatisfiableError
from .feasibility import is_satisfiable
from .load_solver import SolveReport, Termination, check_feasible_load, solve_load
from .model import EnergyReport, Network, energy
from .power_solver import IapOptions, iap

BETA_LO = 1e-6
BETA_MAX = 1e6


@dataclass(frozen=True)
class OptimizationResult:
    p_star: np.ndarray
    x_star: np.ndarray
    r_star: np.ndarray
    energy: EnergyReport
    report: SolveReport


@dataclass(frozen=True)
class BaselineResult:
    beta: float
    p: np.ndarray
    x: np.ndarray
    energy: EnergyReport
    iterations: int


@dataclass(frozen=True)
class SweepRow:
    param: float
    total_energy: Optional[float]
    feasible: bool
    iterations: int
    status: str = "ok"


@dataclass
class SweepTable:
    parameter: str
    rows: list = field(default_factory=list)

    def feasible_rows(self):
        return [row for row in self.rows if row.feasible]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "total_energy", "feasible", "iterations"])
        for row in self.rows:
            w.writerow([repr(float(row.param)),
                        "" if row.total_energy is None else repr(float(row.total_energy)),
                        "true" if row.feasible else "false", row.iterations])
        return buf.getvalue()


def _require_satisfiable(net, r):
    sat = is_satisfiable(net, r)
    if not sat.satisfiable:
        raise UnsatisfiableError(
            f"demand is not satisfiable (spectral radius {sat.rho:.6g} >= 1): "
            "no power yields a positive load", sat.rho)
    return sat


def minimize_energy(net: Network, d_min, opts: Optional[IapOptions] = None,
                    epsilon_prime: float = 0.0, weights=None) -> OptimizationResult:
    """Minimum sum energy: rates at ``d_min``, load ``(1 - epsilon_prime) * 1``, power by IAP.

    Raises UnsatisfiableError for unsatisfiable demand and
    NotImplementableError when full load admits no power, in which case no
    load ``x <= 1`` is feasible either.
    """
    d = net.user_vector(d_min, "d_min")
    if np.any(d <= 0):
        raise LoadCouplingError("minimum demands must be strictly positive")
    if not 0.0 <= epsilon_prime < 1.0:
        raise LoadCouplingError("epsilon_prime must lie in [0, 1)")
    _require_satisfiable(net, d)
    opts = opts or IapOptions()
    x_star = np.full(net.n, 1.0 - epsilon_prime)
    p, report = iap(net, x_star, d, _without_check(opts))
    if report.termination is Termination.INFEASIBLE:
        raise NotImplementableError(
            "full load is not implementable: power diverges, so the problem has "
            "no feasible solution", report)
    if report.termination is not Termination.CONVERGED:
        raise NotImplementableError(
            f"power iteration stopped after {report.iterations} iterations without "
            "reaching the target load", report)
    return OptimizationResult(p, x_star, d, energy(x_star, p, weights), report)


def _without_check(opts):
    # satisfiability was verified by the caller
    from dataclasses import replace
    return replace(opts, check_rates=False)


def uniform_power_baseline(net: Network, d_min, beta_lo: float = BETA_LO,
                           beta_hi: Optional[float] = None, tol: float = 1e-10,
                           weights=None) -> BaselineResult:
    """Smallest common power ``beta`` keeping every load at most one.

    Loads decrease as ``beta`` grows, so bisection applies. Without
    ``beta_hi`` the upper end doubles from 1 W up to ``BETA_MAX``.
    ``tol`` is the final bracket width relative to ``beta``.
    """
    d = net.user_vector(d_min, "d_min")
    _require_satisfiable(net, d)
    iterations = 0
    x_prev = None

    def load_at(beta):
        nonlocal iterations, x_prev
        iterations += 1
        x, rep = solve_load(net, np.full(net.n, beta), d, x0=x_prev, check=False)
        if rep.converged:
            x_prev = x
        return x, rep.converged and check_feasible_load(x)

    if beta_hi is None:
        beta_hi = 1.0
        x_hi, ok = load_at(beta_hi)
        while not ok:
            if beta_hi >= BETA_MAX:
                raise NotImplementableError(
                    f"no uniform power up to {BETA_MAX:g} W keeps all loads <= 1")
            beta_hi = min(2.0 * beta_hi, BETA_MAX)
            x_hi, ok = load_at(beta_hi)
    else:
        x_hi, ok = load_at(beta_hi)
        if not ok:
            raise NotImplementableError(f"load at beta_hi={beta_hi:g} W exceeds one")
    lo, hi = min(beta_lo, beta_hi), beta_hi
    x_lo, ok = load_at(lo)
    if ok:
        hi, x_hi = lo, x_lo
    else:
        while hi - lo > tol * hi:
            mid = 0.5 * (lo + hi)
            x_mid, ok = load_at(mid)
            if ok:
                hi, x_hi = mid, x_mid
            else:
                lo = mid
    p = np.full(net.n, hi)
    return BaselineResult(hi, p, x_hi, energy(x_hi, p, weights), iterations)


def _uniform_load_row(net, r, phi, opts, param):
    p, rep = iap(net, np.full(net.n, phi), r, _without_check(opts))
    if rep.converged:
        return SweepRow(param, float(phi * p.sum()), True, rep.iterations)
    return SweepRow(param, None, False, rep.iterations, rep.termination.value)


def sweep_demand(net: Network, xi_values: Iterable[float], mode: str = "full_load",
                 phi: Optional[float] = None,
                 opts: Optional[IapOptions] = None) -> SweepTable:
    """Total energy for uniform demand ``r = xi * 1`` across ``xi_values``.

    ``mode`` is ``full_load``, ``uniform_load`` (needs ``phi``) or
    ``uniform_power``. Unsatisfiable or non-implementable rows are kept and
    flagged infeasible.
    """
    if mode not in ("full_load", "uniform_load", "uniform_power"):
        raise LoadCouplingError(f"unknown sweep mode {mode!r}")
    if mode == "uniform_load" and (phi is None or not 0 < phi <= 1):
        raise LoadCouplingError("uniform_load needs phi in (0, 1]")
    opts = opts or IapOptions()
    table = SweepTable("xi")
    for xi in sorted(float(v) for v in xi_values):
        r = np.full(net.num_users, xi)
        if not is_satisfiable(net, r).satisfiable:
            table.rows.append(SweepRow(xi, None, False, 0, "unsatisfiable"))
            continue
        try:
            if mode == "uniform_power":
                base = uniform_power_baseline(net, r)
                row = SweepRow(xi, base.energy.total, True, base.iterations)
            else:
                row = _uniform_load_row(net, r, 1.0 if mode == "full_load" else phi,
                                        opts, xi)
        except NotImplementableError:
            row = SweepRow(xi, None, False, 0, "not_implementable")
        table.rows.append(row)
    return table


def sweep_load(net: Network, d, phi_values: Iterable[float],
               opts: Optional[IapOptions] = None) -> SweepTable:
    """Total energy for uniform target load ``phi * 1`` across ``phi_values``."""
    r = net.user_vector(d, "demand")
    _require_satisfiable(net, r)
    opts = opts or IapOptions()
    table = SweepTable("phi")
    for phi in sorted(float(v) for v in phi_values):
        if not 0 < phi <= 1:
            raise LoadCouplingError(f"phi must lie in (0, 1], got {phi}")
        table.rows.append(_uniform_load_row(net, r, phi, opts, phi))
    return table


def convergence_trace(net: Network, d, x_target=1.0,
                      opts: Optional[IapOptions] = None) -> list:
    """``(iteration, ||f(x*; r, p_k) - x*||_2)`` for every outer IAP iteration, from 0."""
    r = net.user_vector(d, "demand")
    p, rep = iap(net, x_target, r, opts)
    if not rep.converged:
        raise NotImplementableError(
            f"power iteration ended with {rep.termination.value}", rep)
    return list(enumerate(rep.distance_trace))


def sample_load_region(net: Network, r, num_samples: int, p_max: float = 2.0,
                       seed: int = 0) -> list:
    """Draw powers uniformly from ``(0, p_max]^n`` and pair each with its load fixed point."""
    r = net.user_vector(r)
    _require_satisfiable(net, r)
    rng = np.random.default_rng(seed)
    # p_max - U[0, p_max) lies in (0, p_max]
    powers = p_max - rng.uniform(0.0, p_max, size=(num_samples, net.n))
    points = []
    for p in powers:
        x, rep = solve_load(net, p, r, check=False)
        points.append((p, x))
    return points

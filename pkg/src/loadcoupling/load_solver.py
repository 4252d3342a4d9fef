"""Iterative algorithm for load (IAL): the unique fixed point of ``x = f(x; r, p)``."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, UnsatisfiableError
from .feasibility import is_satisfiable
from .model import Network

LOAD_TOL = 1e-10
LOAD_MAX_ITER = 100_000
#: Iterates above this load are treated as diverging (only reachable when the
#: satisfiability check is skipped).
LOAD_BLOWUP = 1e12


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible_detected"


_STATUS = {kernels.CONVERGED: Termination.CONVERGED,
           kernels.MAX_ITER: Termination.MAX_ITER,
           kernels.BLOWUP: Termination.INFEASIBLE}


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a fixed-point solve.

    ``residual_trace`` holds the infinity-norm residual per iteration. Power
    solves also fill ``distance_trace`` (2-norm distance of the realized load
    to its target), ``realized_load`` and ``pinned`` (cells held at their cap).
    """
    result: np.ndarray
    iterations: int
    residual_trace: list
    termination: Termination
    distance_trace: list = field(default_factory=list)
    realized_load: np.ndarray | None = None
    pinned: tuple = ()

    @property
    def converged(self) -> bool:
        return self.termination is Termination.CONVERGED


def solve_load(net: Network, p, r, x0=None, tol: float = LOAD_TOL,
               max_iter: int = LOAD_MAX_ITER, check: bool = True):
    """Solve the load coupling equation for fixed power and rates.

    Returns ``(x, report)``. The fixed point is not clamped: loads above one
    are reported as they are. The returned iterate satisfies
    ``||x - f(x)||_inf <= tol`` when ``report.termination`` is ``converged``.

    Raises
    ------
    UnsatisfiableError
        if ``check`` is set and the rates fail the spectral-radius test.
    """
    p = net.cell_vector(p, "power")
    r = net.user_vector(r)
    if np.any(p <= 0):
        raise DomainError("power must be strictly positive")
    if np.any(r < 0):
        raise DomainError("rates must be non-negative")
    if check:
        sat = is_satisfiable(net, r)
        if not sat.satisfiable:
            raise UnsatisfiableError(
                f"rates are not satisfiable: spectral radius {sat.rho:.6g} >= 1", sat.rho)
    x0 = np.ones(net.n) if x0 is None else net.cell_vector(x0, "initial load")
    if np.any(x0 <= 0):
        raise DomainError("initial load must be strictly positive")
    x, iterations, trace, status = kernels.ial(
        net.interference_gains, net.serving_gain, net.owner, r, p, net.noise_power,
        x0, tol, max_iter, LOAD_BLOWUP)
    report = SolveReport(x, int(iterations), [float(t) for t in trace], _STATUS[status])
    return x, report


def check_feasible_load(x) -> bool:
    """True iff every component lies in (0, 1]."""
    x = np.asarray(x, dtype=float)
    return bool(np.all((x > 0) & (x <= 1)))

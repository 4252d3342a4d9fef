"""Network data model and the pure evaluation kernels (SINR, load map, energy).

Conventions: rates are in nats with the resource normalization ``M * B = 1``
baked in, gains are linear power gains, noise power and transmit power are in
watts per resource unit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, ScenarioError


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Network:
    """Static downlink scenario.

    Parameters
    ----------
    users : sequence of sequences of int
        ``users[i]`` lists the global user indices served by cell ``i``.
        Together the lists must partition ``range(num_users)``.
    gains : array_like, shape (n, num_users)
        Linear channel power gain from every cell to every user. Zero means
        no path.
    noise_power : float
        Receiver noise power, watts.
    """

    users: tuple
    gains: np.ndarray
    noise_power: float
    owner: np.ndarray = field(init=False, repr=False)
    serving_gain: np.ndarray = field(init=False, repr=False)
    interference_gains: np.ndarray = field(init=False, repr=False)
    cell_ptr: np.ndarray = field(init=False, repr=False)
    cell_users: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        users = tuple(tuple(int(j) for j in cell) for cell in self.users)
        gains = np.array(self.gains, dtype=float)
        if gains.ndim != 2:
            raise ScenarioError(f"gain matrix must be 2-D, got shape {gains.shape}")
        n, num_users = gains.shape
        if n < 1 or len(users) != n:
            raise ScenarioError(
                f"gain matrix has {n} rows but {len(users)} user lists were given")
        owner = np.full(num_users, -1, dtype=np.int64)
        for i, cell in enumerate(users):
            if not cell:
                raise ScenarioError(f"cell {i} serves no users")
            for j in cell:
                if not 0 <= j < num_users:
                    raise ScenarioError(
                        f"cell {i} lists user {j}, outside 0..{num_users - 1}")
                if owner[j] >= 0:
                    raise ScenarioError(
                        f"user {j} is listed by cells {owner[j]} and {i}")
                owner[j] = i
        orphans = np.flatnonzero(owner < 0)
        if orphans.size:
            raise ScenarioError(f"user {orphans[0]} is not served by any cell")
        if not np.all(np.isfinite(gains)):
            i, j = np.argwhere(~np.isfinite(gains))[0]
            raise ScenarioError(f"gain[{i}, {j}] is not finite")
        if np.any(gains < 0):
            i, j = np.argwhere(gains < 0)[0]
            raise ScenarioError(f"gain[{i}, {j}] = {gains[i, j]} is negative")
        cols = np.arange(num_users)
        serving = gains[owner, cols]
        if np.any(serving <= 0):
            j = int(np.flatnonzero(serving <= 0)[0])
            raise ScenarioError(
                f"user {j} has zero gain from its serving cell {owner[j]}")
        noise = float(self.noise_power)
        if not np.isfinite(noise) or noise < 0:
            raise ScenarioError(f"noise power must be finite and >= 0, got {noise}")

        interference = gains.copy()
        interference[owner, cols] = 0.0
        sizes = np.array([len(c) for c in users], dtype=np.int64)
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(sizes, out=ptr[1:])
        flat = np.array([j for cell in users for j in cell], dtype=np.int64)

        set_ = object.__setattr__
        set_(self, "users", users)
        set_(self, "gains", _readonly(gains))
        set_(self, "noise_power", noise)
        for name, value in (("owner", owner), ("serving_gain", serving),
                            ("interference_gains", interference),
                            ("cell_ptr", ptr), ("cell_users", flat)):
            value = np.ascontiguousarray(value)
            value.setflags(write=False)
            set_(self, name, value)

    @property
    def n(self) -> int:
        return len(self.users)

    @property
    def num_users(self) -> int:
        return self.gains.shape[1]

    def cell_vector(self, value, name="value") -> np.ndarray:
        """Broadcast a scalar or length-n sequence to a float vector of length n."""
        return _vector(value, self.n, name)

    def user_vector(self, value, name="rates") -> np.ndarray:
        """Broadcast a scalar or per-user sequence to a float vector over all users."""
        return _vector(value, self.num_users, name)

    def require_noise(self):
        if not self.noise_power > 0:
            raise DomainError("solvers require a strictly positive noise power")


def _vector(value, size, name):
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        v = np.full(size, float(v))
    if v.shape != (size,):
        raise DomainError(f"{name} must have length {size}, got shape {v.shape}")
    return np.ascontiguousarray(v)


@dataclass(frozen=True)
class EnergyReport:
    per_cell: np.ndarray
    total: float
    weights: Optional[np.ndarray] = None


def sinr(net: Network, x, p, i: int, j: int) -> float:
    """SINR of user ``j`` served by cell ``i``.

    The own-cell load ``x[i]`` does not enter the expression.
    """
    if j not in net.users[i]:
        raise DomainError(f"user {j} is not served by cell {i}")
    x = net.cell_vector(x, "load")
    p = net.cell_vector(p, "power")
    w = p * x
    w[i] = 0.0
    denom = float(w @ net.gains[:, j]) + net.noise_power
    if denom <= 0:
        raise DomainError(
            f"user {j}: noise plus interference is zero, SINR undefined")
    return p[i] * net.gains[i, j] / denom


def load_map(net: Network, x, p, r) -> np.ndarray:
    """Evaluate the load coupling map ``f(x; r, p)``.

    ``f_i = sum_{j in J_i} r_j / log(1 + SINR_j(x, p))`` with natural log.
    """
    x = net.cell_vector(x, "load")
    p = net.cell_vector(p, "power")
    r = net.user_vector(r)
    if np.any(r < 0):
        raise DomainError("rates must be non-negative")
    return kernels.load_map(net.interference_gains, net.serving_gain, net.owner,
                            r, x, p, net.noise_power)


def energy(x, p, weights: Optional[Sequence[float]] = None) -> EnergyReport:
    """Per-cell energy ``x_i * p_i`` and its (optionally weighted) total."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.shape != p.shape:
        raise DomainError(f"load and power lengths differ: {x.shape} vs {p.shape}")
    per_cell = x * p
    if weights is None:
        return EnergyReport(per_cell, float(per_cell.sum()))
    w = np.asarray(weights, dtype=float)
    if w.shape != x.shape:
        raise DomainError(f"weights must have shape {x.shape}, got {w.shape}")
    if np.any(w <= 0):
        raise DomainError("weights must be strictly positive")
    return EnergyReport(per_cell, float(w @ per_cell), w)

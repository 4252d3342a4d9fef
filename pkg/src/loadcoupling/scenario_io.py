"""Scenario files and deterministic synthetic scenarios.

Scenario file schema (JSON text, version 1)::

    {
      "format": "loadcoupling-scenario",
      "version": 1,
      "n_cells": <int>,
      "users": [[<global user index>, ...], ...],   # one list per cell
      "gains": [[<float>, ...], ...],               # n_cells rows x num_users columns, linear
      "noise_power": <float>,                       # watts
      "d_min": [<float>, ...],                      # per user, nats (M*B = 1 normalized)
      "p_cap": null | <float> | [<float>, ...],     # optional, watts
      "metadata": {...},                            # optional, free-form (e.g. bandwidth_hz)
      "solver": {...}                               # optional IAP defaults: mode, outer_tol,
                                                    # inner_tol, max_outer, p0, divergence_power
    }

Floats are written with ``repr`` precision, so save/load round trips are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import LoadCouplingError, ScenarioError
from .model import Network
from .power_solver import IapOptions

FORMAT = "loadcoupling-scenario"
VERSION = 1
_SOLVER_KEYS = {"mode", "outer_tol", "inner_tol", "max_outer", "p0", "divergence_power"}


@dataclass(frozen=True, eq=False)
class Scenario:
    network: Network
    d_min: np.ndarray
    p_cap: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.d_min, dtype=float)
        if d.shape != (self.network.num_users,):
            raise ScenarioError(
                f"d_min has {d.size} entries for {self.network.num_users} users")
        bad = np.flatnonzero(~(np.isfinite(d) & (d > 0)))
        if bad.size:
            j = int(bad[0])
            raise ScenarioError(
                f"d_min of user {j} (cell {self.network.owner[j]}) must be finite "
                f"and > 0, got {d[j]}")
        object.__setattr__(self, "d_min", d)
        if self.p_cap is not None:
            cap = np.asarray(self.p_cap, dtype=float)
            if cap.ndim == 0:
                cap = np.full(self.network.n, float(cap))
            if cap.shape != (self.network.n,):
                raise ScenarioError(f"p_cap needs {self.network.n} entries, got {cap.size}")
            bad = np.flatnonzero(~(np.isfinite(cap) & (cap > 0)))
            if bad.size:
                raise ScenarioError(f"p_cap of cell {int(bad[0])} must be finite and > 0")
            object.__setattr__(self, "p_cap", cap)
        unknown = set(self.solver) - _SOLVER_KEYS
        if unknown:
            raise ScenarioError(f"unknown solver keys: {sorted(unknown)}")

    def iap_options(self, **overrides) -> IapOptions:
        """Solver options: scenario defaults, then the cap, then explicit overrides."""
        kw = dict(self.solver)
        if self.p_cap is not None:
            kw["p_cap"] = self.p_cap
        kw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return IapOptions(**kw)
        except (TypeError, ValueError, LoadCouplingError) as exc:
            raise ScenarioError(f"invalid solver options: {exc}") from exc


def to_dict(scn: Scenario) -> dict:
    net = scn.network
    cap = None if scn.p_cap is None else [float(c) for c in scn.p_cap]
    return {
        "format": FORMAT,
        "version": VERSION,
        "n_cells": net.n,
        "users": [list(cell) for cell in net.users],
        "gains": [[float(g) for g in row] for row in net.gains],
        "noise_power": float(net.noise_power),
        "d_min": [float(d) for d in scn.d_min],
        "p_cap": cap,
        "metadata": dict(scn.metadata),
        "solver": dict(scn.solver),
    }


def dumps(scn: Scenario) -> str:
    return json.dumps(to_dict(scn), indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_scenario(scn: Scenario, path) -> None:
    Path(path).write_text(dumps(scn))


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: value {value!r} is not finite")
    return float(value)


def from_dict(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    if doc.get("format") != FORMAT:
        raise ScenarioError(f"format tag must be {FORMAT!r}, got {doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise ScenarioError(f"unsupported scenario version {doc.get('version')!r}")
    for key in ("n_cells", "users", "gains", "noise_power", "d_min"):
        if key not in doc:
            raise ScenarioError(f"missing required field {key!r}")
    n = doc["n_cells"]
    users = doc["users"]
    if not isinstance(n, int) or n < 1:
        raise ScenarioError(f"n_cells must be a positive integer, got {n!r}")
    if not isinstance(users, list) or len(users) != n:
        raise ScenarioError(f"users must list {n} cells")
    for i, cell in enumerate(users):
        if not isinstance(cell, list) or not all(
                isinstance(j, int) and not isinstance(j, bool) for j in cell):
            raise ScenarioError(f"users[{i}] must be a list of integer user indices")
    num_users = sum(len(cell) for cell in users)
    gains = doc["gains"]
    if not isinstance(gains, list) or len(gains) != n:
        raise ScenarioError(f"gains must have {n} rows")
    rows = []
    for i, row in enumerate(gains):
        if not isinstance(row, list) or len(row) != num_users:
            raise ScenarioError(
                f"gains row {i} (cell {i}) must have {num_users} columns")
        rows.append([_number(g, f"gains[{i}][{j}] (cell {i}, user {j})")
                     for j, g in enumerate(row)])
    noise = _number(doc["noise_power"], "noise_power")
    d_min = doc["d_min"]
    if not isinstance(d_min, list) or len(d_min) != num_users:
        raise ScenarioError(f"d_min must have {num_users} entries")
    d = [_number(v, f"d_min[{j}] (user {j})") for j, v in enumerate(d_min)]
    cap = doc.get("p_cap")
    if cap is not None:
        cap = ([_number(c, f"p_cap[{i}] (cell {i})") for i, c in enumerate(cap)]
               if isinstance(cap, list) else _number(cap, "p_cap"))
    metadata = doc.get("metadata") or {}
    solver = doc.get("solver") or {}
    if not isinstance(metadata, dict) or not isinstance(solver, dict):
        raise ScenarioError("metadata and solver must be JSON objects")
    net = Network(users, np.array(rows, dtype=float).reshape(n, num_users), noise)
    return Scenario(net, np.array(d), cap, metadata, solver)


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return from_dict(doc)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from exc
    return loads(text)


def from_gain_table(gains_db, serving_cell, noise_power, d_min, metadata=None) -> Scenario:
    """Build a scenario from a dense gain table as shipped by measurement-based datasets.

    ``gains_db`` is an ``(n_cells, n_users)`` array of path gains in dB
    (e.g. the per-pixel gains of the users' pixels, one column per user),
    ``serving_cell`` gives each user's serving cell index. Entries of
    ``-inf`` mean no path. ``noise_power`` (watts per resource unit) must be
    supplied explicitly.
    """
    g_db = np.asarray(gains_db, dtype=float)
    serving = np.asarray(serving_cell, dtype=int)
    if g_db.ndim != 2 or serving.shape != (g_db.shape[1],):
        raise ScenarioError("gains_db must be (n_cells, n_users) with one serving cell per user")
    users = [np.flatnonzero(serving == i).tolist() for i in range(g_db.shape[0])]
    gains = np.where(np.isneginf(g_db), 0.0, 10.0 ** (g_db / 10.0))
    return Scenario(Network(users, gains, noise_power),
                    np.broadcast_to(np.asarray(d_min, dtype=float), serving.shape).copy(),
                    metadata=dict(metadata or {}))


@dataclass(frozen=True)
class SyntheticSpec:
    """Grid layout for synthetic scenarios.

    Cells sit on a square grid with ``spacing`` metres between sites; each
    cell's users are drawn uniformly from the ``spacing x spacing`` square
    centred on it. Gains follow ``reference_gain * distance ** -exponent``
    with distances clipped below at 1 m.
    """
    n_cells: int = 1
    users_per_cell: int = 1
    spacing: float = 500.0
    grid_cols: Optional[int] = None
    exponent: float = 3.5
    reference_gain: float = 1e-3
    noise_power: float = 1e-13
    demand: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_cells < 1 or self.users_per_cell < 1:
            raise ScenarioError("need at least one cell and one user per cell")
        if not (self.exponent > 0 and self.spacing > 0 and self.reference_gain > 0):
            raise ScenarioError("exponent, spacing and reference gain must be positive")
        if not (self.noise_power > 0 and self.demand > 0):
            raise ScenarioError("noise power and demand must be positive")


def generate_synthetic(spec: SyntheticSpec) -> Scenario:
    rng = np.random.default_rng(spec.seed)
    cols = spec.grid_cols or math.ceil(math.sqrt(spec.n_cells))
    idx = np.arange(spec.n_cells)
    sites = np.column_stack([idx % cols, idx // cols]) * spec.spacing
    k = spec.users_per_cell
    offsets = rng.uniform(-0.5, 0.5, size=(spec.n_cells, k, 2)) * spec.spacing
    positions = (sites[:, None, :] + offsets).reshape(-1, 2)
    dist = np.linalg.norm(sites[:, None, :] - positions[None, :, :], axis=2)
    gains = spec.reference_gain * np.maximum(dist, 1.0) ** (-spec.exponent)
    users = [list(range(i * k, (i + 1) * k)) for i in range(spec.n_cells)]
    meta = {"generator": "grid", "n_cells": spec.n_cells,
            "users_per_cell": k, "spacing_m": spec.spacing,
            "exponent": spec.exponent, "seed": spec.seed}
    return Scenario(Network(users, gains, spec.noise_power),
                    np.full(spec.n_cells * k, spec.demand), metadata=meta)

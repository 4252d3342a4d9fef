"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation in ``_pykernels`` takes over. ``use_backend`` switches
explicitly (tests and the benchmark run both).
"""
import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

CONVERGED, MAX_ITER, BLOWUP = 0, 1, 2

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = _BACKENDS.get("cython", _pykernels)


def available_backends():
    return sorted(_BACKENDS)


def backend() -> str:
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name: str) -> str:
    """Select the kernel backend by name; returns the previous one."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous = backend()
    _active = _BACKENDS[name]
    return previous


def _f64(a):
    return np.ascontiguousarray(a, dtype=float)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def load_map(G_int, gs, owner, rates, x, p, sigma2):
    return _active.load_map(G_int, gs, owner, _f64(rates), _f64(x), _f64(p), float(sigma2))


def ial(G_int, gs, owner, rates, p, sigma2, x0, tol, max_iter, blowup):
    return _active.ial(G_int, gs, owner, _f64(rates), _f64(p), float(sigma2), _f64(x0),
                       float(tol), int(max_iter), float(blowup))


def eta(a, b, p):
    return _active.eta(_f64(a), _f64(b), float(p))


def cell_power(a, b, p_start, tol, p_max):
    return _active.cell_power(_f64(a), _f64(b), float(p_start), float(tol), float(p_max))


def iap_sweep(G_int, gs, owner, cell_ptr, cell_users, rates, x_t, p, sigma2,
              asynchronous, order, tol, p_max):
    return _active.iap_sweep(G_int, gs, owner, cell_ptr, cell_users, _f64(rates), _f64(x_t),
                             _f64(p), float(sigma2), bool(asynchronous), _i64(order),
                             float(tol), _f64(p_max))

"""Seeded random instances shared by the property and acceptance tests."""
import math

import numpy as np

from loadcoupling import Network, build_lambda, solve_load, spectral_radius

Q_TOY = 3 * (math.e - 1) / (4 - math.e)


def toy_network():
    return Network([[0], [1]], [[1.0, 1 / 3], [1 / 3, 1.0]], 1.0)


def single_cell(g=1.0, noise=1.0):
    return Network([[0]], [[g]], noise)


def random_network(rng, n=None, max_users=3, cross=(0.02, 0.3), asymmetric=True):
    n = int(rng.integers(2, 6)) if n is None else n
    sizes = rng.integers(1, max_users + 1, size=n)
    users, start = [], 0
    for s in sizes:
        users.append(list(range(start, start + s)))
        start += s
    gains = rng.uniform(*cross, size=(n, start))
    for i, cell in enumerate(users):
        gains[i, cell] = rng.uniform(0.5, 2.0, size=len(cell))
    if not asymmetric:
        gains[:] = gains.mean()
    return Network(users, gains, float(rng.uniform(0.05, 0.5)))


def random_rates(rng, net, rho=None):
    """Per-user rates scaled so the coupling matrix has spectral radius ``rho``."""
    rho = rng.uniform(0.2, 0.7) if rho is None else rho
    r = rng.uniform(0.2, 1.0, size=net.num_users)
    return r * rho / spectral_radius(build_lambda(net, r)).rho


def implementable_instance(rng, max_load=0.9, **kw):
    """(net, r, p_true, x) with x the load of p_true, so x is implementable by construction."""
    net = random_network(rng, **kw)
    r = random_rates(rng, net)
    p_true = rng.uniform(0.5, 3.0, size=net.n)
    while True:
        x, rep = solve_load(net, p_true, r)
        assert rep.converged
        if x.max() <= max_load:
            return net, r, p_true, x
        r = r * 0.9 * max_load / x.max()

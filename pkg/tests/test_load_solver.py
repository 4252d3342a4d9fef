import math
import warnings

import numpy as np
import pytest
from scipy.optimize import fsolve

from loadcoupling import (Termination, UnsatisfiableError, check_feasible_load, load_map,
                          solve_load)

from .helpers import Q_TOY, random_network, random_rates, single_cell, toy_network


def test_single_cell_closed_form(backend):
    x, rep = solve_load(single_cell(), [math.e**2 - 1], [1.0])
    assert rep.termination is Termination.CONVERGED
    assert x[0] == pytest.approx(0.5, rel=1e-14)


def test_toy_symmetric_fixed_point(backend):
    x, rep = solve_load(toy_network(), [Q_TOY, Q_TOY], [1.0, 1.0])
    np.testing.assert_allclose(x, [1.0, 1.0], rtol=1e-12)


def test_toy_rate_two_exceeds_full_load(backend):
    # satisfiable, but the load exceeds one for any power
    for p in ([1.0, 1.0], [100.0, 100.0], [1e4, 0.5]):
        x, rep = solve_load(toy_network(), p, [2.0, 2.0])
        assert rep.converged
        assert x.max() > 1.0


def test_matches_root_finder_oracle(backend):
    rng = np.random.default_rng(21)
    for _ in range(10):
        net = random_network(rng)
        r = random_rates(rng, net)
        p = rng.uniform(0.2, 3.0, size=net.n)
        x, rep = solve_load(net, p, r)
        oracle = fsolve(lambda z: z - load_map(net, np.abs(z), p, r), np.ones(net.n),
                        xtol=1e-13)
        np.testing.assert_allclose(x, oracle, rtol=1e-8)
        assert rep.residual_trace[-1] <= 1e-10


def test_report_contract(backend):
    rng = np.random.default_rng(2)
    net = random_network(rng)
    r = random_rates(rng, net)
    x, rep = solve_load(net, np.ones(net.n), r, tol=1e-10)
    assert rep.residual_trace and rep.iterations == len(rep.residual_trace)
    assert np.max(np.abs(load_map(net, x, np.ones(net.n), r) - x)) <= 1e-10


def test_max_iter_reports_best_iterate(backend):
    rng = np.random.default_rng(4)
    net = random_network(rng)
    r = random_rates(rng, net, rho=0.9)
    x, rep = solve_load(net, np.ones(net.n), r, max_iter=3)
    assert rep.termination is Termination.MAX_ITER
    assert rep.iterations == 3 and np.all(x > 0)


def test_unsatisfiable_raises():
    with pytest.raises(UnsatisfiableError):
        solve_load(toy_network(), [1, 1], [3.1, 3.1])


def test_unchecked_divergence_is_flagged(backend):
    x, rep = solve_load(toy_network(), [1, 1], [3.5, 3.5], check=False)
    assert rep.termination is Termination.INFEASIBLE


def test_uniqueness_from_random_starts(backend):
    rng = np.random.default_rng(31)
    for _ in range(20):
        net = random_network(rng)
        r = random_rates(rng, net)
        p = rng.uniform(0.2, 3.0, size=net.n)
        tol = 1e-10
        xa, _ = solve_load(net, p, r, x0=rng.uniform(0.01, 0.1, size=net.n), tol=tol)
        xb, _ = solve_load(net, p, r, x0=rng.uniform(5, 50, size=net.n), tol=tol)
        assert np.max(np.abs(xa - xb)) <= 10 * tol * max(1.0, xa.max())


def test_rate_monotonicity():
    rng = np.random.default_rng(41)
    for _ in range(20):
        net = random_network(rng)
        r = random_rates(rng, net, rho=0.5)
        p = rng.uniform(0.2, 3.0, size=net.n)
        x, _ = solve_load(net, p, r)
        r2 = r.copy()
        r2[rng.integers(r.size)] *= 1.2
        x2, _ = solve_load(net, p, r2)
        assert np.all(x2 > x)


def test_power_scaling_lowers_load():
    rng = np.random.default_rng(43)
    for _ in range(20):
        net = random_network(rng)
        r = random_rates(rng, net)
        p = rng.uniform(0.2, 3.0, size=net.n)
        x, _ = solve_load(net, p, r)
        for beta in (1.1, 2.0, 10.0):
            xb, _ = solve_load(net, beta * p, r)
            assert np.all(xb <= x + 1e-10)


def test_residual_trace_decay_is_a_soft_diagnostic():
    """Non-monotone residuals are flagged with a warning; convergence itself is required."""
    rng = np.random.default_rng(47)
    violations = 0
    for _ in range(30):
        net = random_network(rng)
        r = random_rates(rng, net)
        _, rep = solve_load(net, rng.uniform(0.2, 3.0, size=net.n), r)
        assert rep.converged
        tr = np.array(rep.residual_trace[1:])
        violations += int(np.any(np.diff(tr) > 1e-15))
    if violations:
        warnings.warn(f"{violations}/30 load residual traces were not monotone "
                      "after the first iteration")


@pytest.mark.parametrize("x, ok", [
    ((0.5, 1.0), True),
    ((1.0 + 1e-9, 0.5), False),
    ((0.0, 0.5), False),
])
def test_check_feasible_load(x, ok):
    assert check_feasible_load(x) is ok

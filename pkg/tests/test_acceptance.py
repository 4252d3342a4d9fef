"""Exit criteria. Each test records one PASS/FAIL line shown in the pytest summary."""
import io
import math
import time

import numpy as np
import pytest

from loadcoupling import (IapOptions, NotImplementableError, Termination,
                          SyntheticSpec, convergence_trace, generate_synthetic, iap,
                          interference_map, is_satisfiable, kernels, load_map,
                          minimize_energy, solve_load, sweep_load, uniform_power_baseline)
from loadcoupling.cli import run

from .helpers import (Q_TOY, implementable_instance, random_network, random_rates,
                      single_cell, toy_network)

TIGHT = IapOptions(outer_tol=1e-10, inner_tol=1e-13)
H_OPTS = dict(inner_tol=1e-13)


def best_time(fn, repeat=20):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def test_ac01_toy_satisfiability(acceptance, tmp_path):
    net = toy_network()
    rep = is_satisfiable(net, [2.0, 2.0])
    elapsed = best_time(lambda: is_satisfiable(net, [2.0, 2.0]))
    out = io.StringIO()
    code = run(["check", "--scenario", "tests/data/toy_r2.json"], stdout=out)
    ok = (code == 0 and "verdict: satisfiable" in out.getvalue() and rep.satisfiable
          and abs(rep.rho - 2 / 3) <= 1e-9 and elapsed < 1e-3)
    acceptance("AC1  toy satisfiability", ok,
               f"rho={rep.rho:.12f} (2/3), {elapsed * 1e3:.3f} ms")


def test_ac02_toy_non_implementability(acceptance):
    net = toy_network()
    t = time.perf_counter()
    try:
        minimize_energy(net, [2.0, 2.0])
        infeasible = False
    except NotImplementableError as exc:
        infeasible = exc.report.termination is Termination.INFEASIBLE
    res = minimize_energy(net, [1.0, 1.0], TIGHT)
    elapsed = time.perf_counter() - t
    err = float(np.max(np.abs(res.p_star / Q_TOY - 1)))
    acceptance("AC2  toy full-load (non-)implementability", infeasible and err <= 1e-6
               and elapsed < 0.1,
               f"d=2 infeasible_detected={infeasible}, d=1 rel err {err:.2e}, "
               f"{elapsed * 1e3:.1f} ms")


def test_ac03_single_cell_closed_forms(acceptance):
    worst = 0.0
    for g, noise in ((1.0, 1.0), (2.0, 0.5), (1e-9, 1e-13)):
        net = single_cell(g, noise)
        for d in (0.5, 1.0, 2.0):
            e = minimize_energy(net, [d]).energy.total
            worst = max(worst, abs(e / (noise * math.expm1(d) / g) - 1))
        phis = [0.25, 0.5, 0.75, 1.0]
        for row, phi in zip(sweep_load(net, [1.0], phis).rows, phis):
            want = phi * noise * math.expm1(1 / phi) / g
            worst = max(worst, abs(row.total_energy / want - 1) if row.feasible else math.inf)
    acceptance("AC3  single-cell closed forms", worst <= 1e-8, f"max rel err {worst:.2e}")


def test_ac04_standard_interference_properties(acceptance):
    rng = np.random.default_rng(2024)
    t = time.perf_counter()
    failures = 0
    min_margin = math.inf
    for _ in range(100):
        net, r, p_true, x = implementable_instance(rng)
        pbar = p_true * rng.uniform(0.3, 3.0, size=net.n)
        h = interference_map(net, pbar, x, r, **H_OPTS)
        failures += not np.all(h > 0)
        bump = rng.uniform(0, 1.0, size=net.n) * (rng.uniform(size=net.n) < 0.7)
        failures += not np.all(interference_map(net, pbar + bump, x, r, **H_OPTS) >= h)
        for alpha in (1.1, 2.0, 3.0):
            margin = alpha * h - interference_map(net, alpha * pbar, x, r, **H_OPTS)
            min_margin = min(min_margin, float(margin.min()))
    elapsed = time.perf_counter() - t
    acceptance("AC4  positivity/monotonicity/scalability of h",
               failures == 0 and min_margin > 1e-12 and elapsed < 10,
               f"{failures} failures, min scalability margin {min_margin:.2e}, {elapsed:.2f} s")


def test_ac05_uniqueness_and_mode_equivalence(acceptance):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        net, r, _, x = implementable_instance(rng)
        sols = []
        for p0 in (1.0, rng.uniform(0.01, 10.0, size=net.n)):
            for mode in ("synchronous", "asynchronous"):
                opts = IapOptions(mode=mode, p0=p0, outer_tol=1e-10, inner_tol=1e-13)
                p, rep = iap(net, x, r, opts)
                assert rep.converged
                sols.append(p)
        worst = max(worst, max(float(np.max(np.abs(s - sols[0]))) for s in sols))
    acceptance("AC5  sync/async uniqueness", worst <= 1e-6, f"max inf-norm gap {worst:.2e}")


def test_ac06_load_power_monotonicity(acceptance):
    rng = np.random.default_rng(6)
    min_drop = math.inf
    for _ in range(50):
        net, r, _, x = implementable_instance(rng)
        x2 = x.copy()
        x2[rng.integers(net.n)] += 0.05
        assert x2.max() <= 1
        p, _ = iap(net, x, r, TIGHT)
        p2, rep = iap(net, x2, r, TIGHT)
        assert rep.converged
        min_drop = min(min_drop, float(np.min(p - p2)))
    acceptance("AC6  larger load needs strictly less power", min_drop > 1e-12,
               f"min power decrease {min_drop:.2e}")


def test_ac07_open_region_probe(acceptance):
    rng = np.random.default_rng(7)
    ok = True
    for _ in range(25):
        net, r, p, x = implementable_instance(rng)
        x_tilde, _ = solve_load(net, 1.5 * p, r)
        p_tilde, rep = iap(net, x_tilde, r)
        ok &= bool(np.all(x_tilde < x)) and rep.converged
    acceptance("AC7  open implementable region", ok)


def asymmetric_instance(rng):
    """Random asymmetric network with demand low enough that load 0.6 is implementable."""
    net = random_network(rng)
    d = random_rates(rng, net, rho=0.5)
    while not iap(net, 0.6, d, IapOptions(max_outer=2000))[1].converged:
        d = 0.7 * d
    return net, d


def test_ac08_optimality_dominance(acceptance):
    rng = np.random.default_rng(8)
    phis = [0.6, 0.7, 0.8, 0.9, 1.0]
    min_gap = math.inf
    ok = True
    for _ in range(25):
        net, d = asymmetric_instance(rng)
        full = minimize_energy(net, d, TIGHT).energy.total
        table = sweep_load(net, d, phis, TIGHT)
        energies = [row.total_energy for row in table.rows]
        ok &= all(row.feasible for row in table.rows)
        ok &= all(b < a for a, b in zip(energies, energies[1:]))
        base = uniform_power_baseline(net, d).energy.total
        by_phi = dict(zip(phis, energies))
        for other in (by_phi[0.6], by_phi[0.8], base):
            min_gap = min(min_gap, (other - full) / full)
    ok &= min_gap > 1e-6
    acceptance("AC8  full load beats uniform load and uniform power", ok,
               f"min relative saving {min_gap:.2e}")


def test_ac09_rate_monotone_load(acceptance):
    rng = np.random.default_rng(9)
    min_gain = math.inf
    for _ in range(50):
        net = random_network(rng)
        r = random_rates(rng, net, rho=rng.uniform(0.2, 0.8))
        p = rng.uniform(0.1, 3.0, size=net.n)
        x, _ = solve_load(net, p, r)
        x2, _ = solve_load(net, p, 1.1 * r)
        min_gain = min(min_gain, float(np.min(x2 - x)))
    acceptance("AC9  higher rates give strictly higher load", min_gain > 0,
               f"min load increase {min_gain:.2e}")


def test_ac10_residuals_and_trace(acceptance):
    rng = np.random.default_rng(10)
    worst_load = worst_power = 0.0
    for _ in range(30):
        net, r, p, x = implementable_instance(rng)
        xs, rep = solve_load(net, p, r)
        worst_load = max(worst_load, float(np.max(np.abs(load_map(net, xs, p, r) - xs))))
        ps, rep = iap(net, x, r)
        assert rep.converged
        worst_power = max(worst_power, float(np.max(np.abs(load_map(net, x, ps, r) - x))))
    xis = [0.25, 0.5, 0.75, 1.0, 1.25]
    traces = [convergence_trace(toy_network(), [xi, xi]) for xi in xis]
    decreasing = all(all(b[1] < a[1] for a, b in zip(t, t[1:])) for t in traces)
    counts = [len(t) - 1 for t in traces]
    ok = (worst_load <= 1e-10 and worst_power <= 1e-5 and decreasing
          and counts == sorted(counts))
    acceptance("AC10 residual tolerances and convergence trend", ok,
               f"load res {worst_load:.1e}, IAP res {worst_power:.1e}, iterations {counts}")


@pytest.mark.parametrize("name", kernels.available_backends())
def test_ac11_full_scale(acceptance, name):
    scn = generate_synthetic(SyntheticSpec(n_cells=148, users_per_cell=10, seed=1))
    prev = kernels.use_backend(name)
    try:
        t = time.perf_counter()
        res = minimize_energy(scn.network, scn.d_min)
        elapsed = time.perf_counter() - t
    finally:
        kernels.use_backend(prev)
    ok = res.report.converged and res.report.iterations < 100 and elapsed < 60
    acceptance(f"AC11 148-cell scale ({name} kernels)", ok,
               f"{res.report.iterations} outer iterations, {elapsed:.2f} s")

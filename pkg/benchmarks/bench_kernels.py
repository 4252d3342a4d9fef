"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--cells 148] [--users 10] [--repeat 5]
"""
import argparse
import time

import numpy as np

from loadcoupling import SyntheticSpec, generate_synthetic, iap, kernels, minimize_energy, solve_load
from loadcoupling.model import load_map


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=148)
    ap.add_argument("--users", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    scn = generate_synthetic(SyntheticSpec(n_cells=args.cells, users_per_cell=args.users, seed=1))
    net, d = scn.network, scn.d_min
    p = np.ones(net.n)
    x = np.full(net.n, 0.5)
    cases = {
        "load_map": lambda: load_map(net, x, p, d),
        "solve_load": lambda: solve_load(net, p, d),
        "iap (x=0.8)": lambda: iap(net, 0.8, d),
        "minimize_energy": lambda: minimize_energy(net, d),
    }
    names = kernels.available_backends()
    print(f"{net.n} cells, {net.num_users} users; backends: {', '.join(names)}")
    print(f"{'case':<18}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases.items():
        times = []
        for name in names:
            prev = kernels.use_backend(name)
            try:
                fn()
                times.append(best_of(fn, args.repeat))
            finally:
                kernels.use_backend(prev)
        row = f"{label:<18}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[names.index('python')] / times[names.index('cython')]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()

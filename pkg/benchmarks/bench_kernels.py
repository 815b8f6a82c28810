"""Compare the numba and pure-numpy kernel backends on identical inputs.

The backend is chosen once at import time, so each measurement runs in a
child interpreter: once normally (numba when installed) and once with
LEVYSID_NO_NUMBA=1. Timings are best-of-5 wall clock after a warmup call
that absorbs numba compilation.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--draws N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_child(rows, draws):
    import numpy as np

    from levysid import builtin_model, generate_grid, simulate_pairs
    from levysid._kernels import cms_block, normals_block, sim_noise_block
    from levysid.backend import backend_name

    alphas = np.array([0.5, 1.0, 1.5])
    betas = np.array([0.5, 0.0, -0.5])
    key = 0x9E3779B97F4A7C15

    results = {"backend": backend_name()}

    normals_block(key, 0, 1000)                      # warmup / compile
    results["normals_block"] = _best_of(lambda: normals_block(key, 0, draws))

    cms_block(key, 0, 1000, 1.5, -0.5)
    results["cms_block"] = _best_of(lambda: cms_block(key, 0, draws, 1.5, -0.5))

    sim_noise_block(key, 0, 1000, alphas, betas)
    results["sim_noise_block"] = _best_of(
        lambda: sim_noise_block(key, 0, rows, alphas, betas))

    model = builtin_model("lorenz3d")
    Z = generate_grid([[-2.0, 2.0]] * 3, [40, 40, 40])
    simulate_pairs(model, Z[:1000], 1e-3, 1)
    results["simulate_pairs_64k"] = _best_of(
        lambda: simulate_pairs(model, Z, 1e-3, 1), repeats=3)

    print(json.dumps(results))


def measure(disable_numba, rows, draws):
    env = dict(os.environ)
    if disable_numba:
        env["LEVYSID_NO_NUMBA"] = "1"
    else:
        env.pop("LEVYSID_NO_NUMBA", None)
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--child",
         "--rows", str(rows), "--draws", str(draws)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200_000,
                    help="rows for the per-row noise kernel (3 components)")
    ap.add_argument("--draws", type=int, default=1_000_000,
                    help="draws for the sampler kernels")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        run_child(args.rows, args.draws)
        return

    fast = measure(False, args.rows, args.draws)
    slow = measure(True, args.rows, args.draws)
    if fast["backend"] == slow["backend"]:
        print("numba unavailable; both runs used the numpy backend")

    names = [k for k in fast if k != "backend"]
    width = max(len(n) for n in names)
    print(f"{'kernel':<{width}}  {fast['backend']:>10}  {slow['backend']:>10}  ratio")
    for name in names:
        a, b = fast[name], slow[name]
        print(f"{name:<{width}}  {a * 1e3:>8.2f}ms  {b * 1e3:>8.2f}ms  {b / a:>5.2f}x")


if __name__ == "__main__":
    main()

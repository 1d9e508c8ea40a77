"""Benchmark the compiled coordinate-descent kernel against the numpy
fallback across problem sizes and penalty strengths.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Both backends solve the identical problem from the identical warm start;
the check column reports the max coefficient difference so a speedup
never hides a divergence. The fit entry points always route through
whichever backend imported (compiled if the extension built, numpy
otherwise); this script times both explicitly.
"""

import argparse
import time

import numpy as np

from eventflow._kernels import available_backends, get_backend

CASES = [
    # (n_rows, n_cols, lam_fraction) spanning tall-thin to square-ish
    (200, 5, 0.3),
    (500, 10, 0.3),
    (500, 10, 0.05),
    (2000, 25, 0.3),
    (2000, 25, 0.05),
    (5000, 50, 0.1),
    (10000, 100, 0.1),
]


def make_problem(n, p, lam_frac, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    X -= X.mean(axis=0)
    X = np.asfortranarray(X)
    beta = np.zeros(p)
    beta[: max(1, p // 4)] = rng.uniform(0.5, 2.0, max(1, p // 4))
    y = X @ beta + 0.1 * rng.normal(size=n)
    y -= y.mean()
    lam_max = max(abs(float(np.dot(X[:, j], y))) / n for j in range(p))
    return X, y, lam_frac * lam_max


def time_solve(mod, X, y, lam, repeats):
    best = np.inf
    beta = None
    sweeps = 0
    for _ in range(repeats):
        beta = np.zeros(X.shape[1])
        t0 = time.perf_counter()
        sweeps, converged, _ = mod.cd_solve(X, y, lam, 1e-9, 10_000, beta)
        best = min(best, time.perf_counter() - t0)
        assert converged
    return best, beta, sweeps


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per case; best time wins")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled extension missing; nothing to compare")
        return

    header = f"{'case':>16} {'sweeps':>6}"
    for name in backends:
        header += f" {name + ' (ms)':>12}"
    header += f" {'speedup':>8} {'max |diff|':>11}"
    print(header)

    for n, p, frac in CASES:
        X, y, lam = make_problem(n, p, frac)
        times, betas, sweeps = {}, {}, 0
        for name in backends:
            times[name], betas[name], sweeps = time_solve(
                get_backend(name), X, y, lam, args.repeats
            )
        diff = float(np.abs(betas[backends[0]] - betas[backends[1]]).max())
        speedup = times["python"] / times["cython"]
        row = f"{f'{n}x{p} f={frac}':>16} {sweeps:>6}"
        for name in backends:
            row += f" {times[name] * 1e3:>12.3f}"
        row += f" {speedup:>7.1f}x {diff:>11.2e}"
        print(row)


if __name__ == "__main__":
    main()

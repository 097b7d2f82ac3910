"""Time the compiled sweep kernel against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--n 200] [--m 50] [--T 2000]
                                       [--repeat 5]

Both kernels run the identical row sequence, so the output also checks
that their final iterates agree before reporting timings.
"""

import argparse
import time

import numpy as np

from qkacz._kernels import NORM_WEIGHTED, _pykernels

try:
    from qkacz._kernels import _ckernels
except ImportError:
    _ckernels = None


def build_problem(n, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    A /= np.linalg.norm(A, 2)
    x = rng.standard_normal(m)
    x *= 0.45 / np.linalg.norm(x)
    b = A @ x
    norms_sq = np.einsum("ij,ij->i", A, A)
    cum = np.cumsum(norms_sq / norms_sq.sum())
    return A, b, norms_sq, cum, x


def run_once(kernel, A, b, norms_sq, cum, x_sol, T, seed):
    x0 = np.zeros(A.shape[1])
    t0 = time.perf_counter()
    iterates, selected, errors, fail_k, fail_j = kernel.kaczmarz_sweep(
        A, b, norms_sq, cum, NORM_WEIGHTED, x0, 1.0, T, seed, x_sol)
    dt = time.perf_counter() - t0
    assert fail_k == -1
    return dt, iterates[-1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--m", type=int, default=50)
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    A, b, norms_sq, cum, x_sol = build_problem(args.n, args.m, args.seed)
    kernels = [("python", _pykernels)]
    if _ckernels is not None:
        kernels.append(("compiled", _ckernels))
    else:
        print("compiled kernel not built; timing the fallback only")

    finals = {}
    best = {}
    for name, kernel in kernels:
        times = []
        for _ in range(args.repeat):
            dt, final = run_once(kernel, A, b, norms_sq, cum, x_sol,
                                 args.T, args.seed)
            times.append(dt)
        best[name] = min(times)
        finals[name] = final

    if len(finals) == 2:
        gap = np.max(np.abs(finals["python"] - finals["compiled"]))
        print(f"final-iterate agreement: {gap:.3e}")

    print(f"\nproblem: {args.n}x{args.m}, T={args.T}, "
          f"best of {args.repeat}")
    print(f"{'kernel':<10} {'seconds':>12} {'steps/s':>14}")
    for name in finals:
        print(f"{name:<10} {best[name]:>12.6f} "
              f"{args.T / best[name]:>14.0f}")
    if len(finals) == 2:
        print(f"\nspeedup: {best['python'] / best['compiled']:.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the compiled mixture kernels against the NumPy fallback.

Times the raw kernels in-process (both implementations are importable side
by side) and a full EM fit per backend in subprocesses, since the backend
is chosen once at import time.

Usage: python benchmarks/bench_kernels.py [--sizes 100,1000,5000] [--repeats 200]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from uslads._kernels import _pykernels

try:
    from uslads._kernels import _cykernels
except ImportError:
    _cykernels = None

K = 8


def workload(n, seed=0):
    rng = np.random.default_rng(seed)
    points = np.ascontiguousarray(rng.uniform(0, 128, size=(n, 2)))
    weights = np.full(K, 1.0 / K)
    means = np.ascontiguousarray(rng.uniform(0, 128, size=(K, 2)))
    covs = np.empty((K, 2, 2))
    for j in range(K):
        m = rng.uniform(-1, 1, size=(2, 2))
        covs[j] = m @ m.T + 0.5 * np.eye(2)
    resp, _ = _pykernels.estep(points, weights, means, covs)
    return points, weights, means, np.ascontiguousarray(covs), np.ascontiguousarray(resp)


def time_call(fn, repeats):
    return min(timeit.repeat(fn, number=1, repeat=repeats))


def bench_kernels(sizes, repeats):
    backends = [("python", _pykernels)]
    if _cykernels is not None:
        backends.append(("cython", _cykernels))
    header = f"{'kernel':<18}{'n':>8}" + "".join(f"{name:>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for n in sizes:
        points, weights, means, covs, resp = workload(n)
        cases = {
            "weighted_log_prob": lambda impl: impl.weighted_log_prob(points, weights, means, covs),
            "estep": lambda impl: impl.estep(points, weights, means, covs),
            "mstep": lambda impl: impl.mstep(points, resp, 1e-4),
            "mahalanobis_batch": lambda impl: impl.mahalanobis_batch(
                points, np.ascontiguousarray(means[0]), np.ascontiguousarray(covs[0])
            ),
        }
        for name, call in cases.items():
            times = [time_call(lambda impl=impl: call(impl), repeats) for _, impl in backends]
            row = f"{name:<18}{n:>8}" + "".join(f"{t * 1e6:>12.1f}us" for t in times)
            if len(times) == 2:
                row += f"{times[0] / times[1]:>9.1f}x"
            print(row)


FIT_SNIPPET = """
import numpy as np, timeit
from uslads import fit_gmm, kernel_backend
rng = np.random.default_rng(0)
pts = np.concatenate([rng.normal(c, 3.0, size=({n} // 4, 2))
                      for c in ((20, 20), (20, 100), (100, 20), (100, 100))])
best = min(timeit.repeat(lambda: fit_gmm(pts, 4, seed=1), number=1, repeat={repeats}))
print(f"fit_gmm n={n} k=4 [{{kernel_backend}}]: {{best * 1e3:.2f}} ms")
"""


def bench_fit(sizes, repeats):
    for n in sizes:
        for pure in ("1", "0"):
            env = dict(os.environ, USLADS_PURE_PYTHON=pure)
            code = FIT_SNIPPET.format(n=n, repeats=max(3, repeats // 20))
            subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100,1000,5000",
                        help="comma-separated point counts")
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _cykernels is None:
        print("compiled kernels not built; timing the NumPy fallback only\n")
    bench_kernels(sizes, args.repeats)
    print(flush=True)
    bench_fit(sizes, args.repeats)


if __name__ == "__main__":
    main()

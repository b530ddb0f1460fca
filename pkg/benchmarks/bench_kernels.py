"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--points 120] [--scale 0.9] [--repeat 3]

Each kernel is run on the same Rips complex of a noisy sphere; outputs of
both backends are compared before anything is timed.
"""

import argparse
import time

import numpy as np
from scipy.spatial.distance import pdist, squareform

from phkm import _kernels_py
from phkm.homology import boundary_matrix, build_vr_filtration
from phkm.shapes import add_uniform_noise, sample_sphere

try:
    from phkm import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=120)
    ap.add_argument("--scale", type=float, default=0.9)
    ap.add_argument("--max-dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")

    pc = add_uniform_noise(sample_sphere(args.points, 1.0, args.seed), 0.05, args.seed + 1)
    dist = squareform(pdist(pc.points))
    adj = (dist <= args.scale).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    fc = build_vr_filtration(pc, args.scale, args.max_dim)
    indptr, indices = boundary_matrix(fc)
    n = len(fc)
    co_ptr, co_idx = _kernels.anti_transpose(indptr, indices, n)
    top = int(fc.dim_of.max())
    co_dims = (top - fc.dim_of)[::-1]

    cases = {
        "rips_cliques": lambda m: m.rips_cliques(adj, args.max_dim + 2),
        "anti_transpose": lambda m: m.anti_transpose(indptr, indices, n),
        "reduce (boundary)": lambda m: m.reduce_boundary(indptr, indices, fc.dim_of),
        "reduce (coboundary)": lambda m: m.reduce_boundary(co_ptr, co_idx, co_dims),
    }
    print(f"{args.points} points, scale {args.scale}: {n} simplices, {len(indices)} boundary entries")
    print(f"{'kernel':<22}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}")
    for name, call in cases.items():
        tc, out_c = best_of(lambda: call(_kernels), args.repeat)
        tp, out_p = best_of(lambda: call(_kernels_py), 1)
        same = all(np.array_equal(a, b) for a, b in zip(out_c, out_p)) if isinstance(out_c, (list, tuple)) \
            else np.array_equal(out_c, out_p)
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<22}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()

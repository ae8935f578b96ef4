"""Compare the compiled and numpy kernel backends.

Run: python benchmarks/bench_kernels.py [--grid 500] [--repeat 5]
"""
import argparse
import math
import time

import numpy as np

from mmfusion.harness import make_scenario
from mmfusion.kernels import available_backends
from mmfusion.likelihood import build_pool_fields
from mmfusion.obsmodel import observe


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=500)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    scn = make_scenario("biased")
    rng = np.random.default_rng(0)
    target = np.array([3.0, -7.0, 1.0])
    obs = [observe(bs, target, rng) for bs in scn.bs_profiles]
    fields = build_pool_fields(scn.bs_profiles, obs)
    _, pts = scn.search_region(args.grid, args.grid).cells()
    pts = np.ascontiguousarray(pts)
    toas, aoas = fields[0::2], fields[1::2]
    params = (
        np.ascontiguousarray([t.bs_position for t in toas], dtype=float),
        np.array([t.d_hat for t in toas]),
        np.array([t.sigma_d for t in toas]),
        np.ascontiguousarray([a.u_hat for a in aoas], dtype=float),
        np.array([a.kappa for a in aoas]),
        np.array([a.log_norm for a in aoas]),
    )
    backends = available_backends()
    log_q = backends["python"].log_columns(pts, *params)[0]
    w = np.full(log_q.shape[1], 1.0 / log_q.shape[1])
    rows = rng.integers(0, len(pts), args.samples)
    sample_q = np.ascontiguousarray(log_q[rows])
    log_psi = sample_q @ w

    print(f"grid {args.grid}x{args.grid} ({len(pts)} cells in hexagon), {args.samples} samples, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends) + "     speedup")
    cases = {
        "log_columns": lambda k: k.log_columns(pts, *params),
        "weighted_argmax": lambda k: k.weighted_argmax(log_q, w),
        "objective_terms": lambda k: k.objective_terms(sample_q, log_psi, w),
    }
    for name, fn in cases.items():
        t = {b: best_of(lambda: fn(k), args.repeat) for b, k in backends.items()}
        line = f"{name:<18}" + "".join(f"{t[b] * 1e3:>10.2f}ms" for b in backends)
        if "cython" in t:
            line += f"   x{t['python'] / t['cython']:.1f}"
        print(line)


if __name__ == "__main__":
    main()

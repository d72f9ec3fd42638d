"""Benchmark the compiled kernels against the NumPy reference backend.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Times the hot kernels on two kinds of workload: large candidate batches (the
stability sampler and grid search) and many small single evaluations (the
per-step solver path, where per-call overhead dominates).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rateindep import _reference as ref

try:
    from rateindep import _speedups as fast
except ImportError:
    fast = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def make_workloads():
    rng = np.random.default_rng(0)
    n_batch, p = 20_000, 4
    w = np.ascontiguousarray(rng.uniform(0.1, 2.0, p))
    alpha = np.ascontiguousarray(rng.uniform(0.5, 2.0, p))
    g = np.ascontiguousarray(rng.uniform(-2, 2, p))
    a = np.ascontiguousarray(rng.uniform(-2, 2, p))
    B = np.ascontiguousarray(rng.uniform(-2, 2, (n_batch, p)))
    Bpos = np.ascontiguousarray(rng.uniform(0.0, 1.0, (n_batch, 2)))
    kappas = np.ascontiguousarray(rng.uniform(0.5, 2.0, 2))
    apos = np.ascontiguousarray(rng.uniform(0.5, 1.0, 2))
    areas = np.ascontiguousarray(rng.uniform(0.5, 1.5, 2))
    n_i2 = 5
    g5 = np.ascontiguousarray(rng.uniform(-1, 1, n_i2))
    lo5 = np.full(n_i2, -2.0)
    hi5 = np.full(n_i2, 2.0)
    fixed5 = np.zeros(n_i2, dtype=np.uint8)
    starts5 = [np.ascontiguousarray(rng.uniform(-2, 2, n_i2)) for _ in range(64)]
    prev5 = np.ascontiguousarray(rng.uniform(-2, 2, n_i2))
    small_calls = 30_000
    prev = np.ascontiguousarray(rng.uniform(-2, 2, p))
    lo = np.full(p, -10.0)
    hi = np.full(p, 10.0)

    def batch_suite(impl):
        return {
            "weighted_l1_batch (20k x 4)":
                lambda: impl.weighted_l1_batch(w, a, B),
            "power_energy_batch (20k x 4)":
                lambda: impl.power_energy_batch(w, alpha, 2.0, g, B),
            "threshold_diss_batch (20k x 4)":
                lambda: impl.threshold_dissipation_batch(w, 1.5, 0.5, a, B),
            "drop_diss_batch (20k x 2)":
                lambda: impl.drop_dissipation_batch(areas, 0.4, apos, Bpos),
            "chain_energy_batch (20k x 2)":
                lambda: impl.chain_energy_batch(1.5, kappas, Bpos, 0.7, 0),
            "well_energy_batch (20k x 4)":
                lambda: impl.well_energy_batch(0.25, g, B),
        }

    def small_suite(impl):
        def many_l1():
            for _ in range(small_calls):
                impl.weighted_l1(w, a, prev)

        def many_play():
            for _ in range(small_calls):
                impl.play_update(alpha, 2.0, g, 0.7, prev, lo, hi)

        def descents():
            for s in starts5:
                impl.i2_descent(0.25, g5, 0.5, s, prev5, lo5, hi5, fixed5,
                                1e-12, 400)

        return {
            f"weighted_l1 single ({small_calls} calls)": many_l1,
            f"play_update single ({small_calls} calls)": many_play,
            "i2_descent (64 starts, n=5)": descents,
        }

    return batch_suite, small_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    batch_suite, small_suite = make_workloads()
    rows = []
    for suite in (batch_suite, small_suite):
        ref_cases = suite(ref)
        fast_cases = suite(fast) if fast is not None else {}
        for name, fn in ref_cases.items():
            t_ref = best_of(fn, args.repeat)
            if fast is not None:
                t_fast = best_of(fast_cases[name], args.repeat)
                rows.append((name, t_ref, t_fast, t_ref / t_fast))
            else:
                rows.append((name, t_ref, None, None))

    width = max(len(r[0]) for r in rows)
    if fast is None:
        print("compiled extension not built; timing the NumPy backend only\n")
        print(f"{'kernel':<{width}}  {'numpy':>10}")
        for name, t_ref, _, _ in rows:
            print(f"{name:<{width}}  {t_ref * 1e3:>8.2f}ms")
        return
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, t_ref, t_fast, speedup in rows:
        print(f"{name:<{width}}  {t_ref * 1e3:>8.2f}ms  {t_fast * 1e3:>8.2f}ms  "
              f"{speedup:>7.1f}x")


if __name__ == "__main__":
    main()

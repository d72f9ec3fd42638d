"""Independent brute-force oracles used to freeze expected test values.

Everything here is deliberately dumb: dense line searches, exhaustive
partition enumeration, nested grid minimization, and small-step time
stepping.  None of it shares code paths with the package internals it
checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def line_search_min(f, lo: float, hi: float, step: float = 1e-6) -> float:
    """Argmin of a scalar function by dense vectorized evaluation."""
    zs = np.arange(lo, hi + step, step)
    vals = f(zs)
    return float(zs[np.argmin(vals)])


def partition_sup(pair_cost, states) -> float:
    """Supremum of chain sums over all sub-partitions of a state sequence.

    ``pair_cost(a, b)`` is the transition cost; chains run from the first to
    the last state through any subset of the interior states, left-to-right
    summation to mirror the jump-sum convention.
    """
    n = len(states)
    interior = list(range(1, n - 1))
    best = -math.inf
    for r in range(len(interior) + 1):
        for subset in itertools.combinations(interior, r):
            chain = [0, *subset, n - 1]
            total = 0.0
            for a, b in zip(chain[:-1], chain[1:]):
                c = pair_cost(states[a], states[b])
                if math.isinf(c):
                    total = math.inf
                    break
                total += c
            best = max(best, total)
    return best


def play_time_stepping(target, radius: float, z0: float, T: float,
                       n_steps: int, sample_times=()):
    """Scalar hysteresis evolution by small-step clipping.

    At each step the state is clipped into ``[target(t) - radius,
    target(t) + radius]``, the exact incremental update of the scalar
    quadratic model with threshold dissipation.  Returns the states at
    ``sample_times`` (nearest step) plus the final state.
    """
    z = z0
    dt = T / n_steps
    want = {int(round(s / dt)): s for s in sample_times}
    out = {}
    for k in range(1, n_steps + 1):
        t = k * dt
        c = target(t)
        lo, hi = c - radius, c + radius
        if z < lo:
            z = lo
        elif z > hi:
            z = hi
        if k in want:
            out[want[k]] = z
    return out, z


def nested_grid_min(f_batch, lo, hi, res: int = 21, rounds: int = 8):
    """Global minimum of a smooth coercive function by shrinking lattices.

    ``f_batch`` maps an (n, p) array of points to n values.  Returns
    (argmin, min).  Good to ~(hi-lo)/res**rounds per coordinate.
    """
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    best_x, best_v = None, math.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], res) for i in range(len(lo))]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = f_batch(pts)
        k = int(np.argmin(vals))
        if vals[k] < best_v:
            best_v = float(vals[k])
            best_x = pts[k].copy()
        half = (hi - lo) / (res - 1)
        lo = best_x - half
        hi = best_x + half
    return best_x, best_v


def second_differences(values: np.ndarray) -> np.ndarray:
    """Central second differences of equally spaced samples."""
    return values[2:] - 2.0 * values[1:-1] + values[:-2]


_GL5_X, _GL5_W = np.polynomial.legendre.leggauss(5)


def gauss_legendre_5(f, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * sum(w * f(mid + half * x) for x, w in zip(_GL5_X, _GL5_W)))

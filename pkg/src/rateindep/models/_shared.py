"""Small helpers shared by the model plugins."""

from __future__ import annotations

import numpy as np


def broadcast_param(value, n: int, name: str) -> np.ndarray:
    """Scalar or length-n sequence -> read-only float64 array of length n."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    elif arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or a sequence of length {n}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def box_param(bounds, n: int, name: str = "bounds"):
    """Accept (lo, hi) scalars or per-component arrays; return two arrays."""
    b = np.asarray(bounds, dtype=np.float64)
    if b.shape == (2,):
        lo = np.full(n, b[0])
        hi = np.full(n, b[1])
    elif b.shape == (2, n):
        lo, hi = b[0].copy(), b[1].copy()
    else:
        raise ValueError(f"{name} must be (lo, hi) or a 2x{n} array")
    if not np.all(lo < hi):
        raise ValueError(f"{name} must satisfy lo < hi componentwise")
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def in_box(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    return bool(np.all(values >= lo) and np.all(values <= hi))

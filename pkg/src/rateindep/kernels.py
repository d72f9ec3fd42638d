"""Backend selection for the numeric kernels.

Tries the compiled extension first and falls back to the NumPy reference
implementation.  Set ``RATEINDEP_PURE_PYTHON=1`` to force the fallback.
Callers are expected to pass C-contiguous float64 arrays; the thin wrappers
here coerce anything else.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("RATEINDEP_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _speedups as _impl
    except ImportError:
        from . import _reference as _impl
else:
    from . import _reference as _impl

BACKEND = _impl.BACKEND


def _c1(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _c2(a):
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim == 1:
        out = out.reshape(1, -1)
    return out


def weighted_l1(w, a, b) -> float:
    return float(_impl.weighted_l1(_c1(w), _c1(a), _c1(b)))


def weighted_l1_batch(w, a, B) -> np.ndarray:
    return np.asarray(_impl.weighted_l1_batch(_c1(w), _c1(a), _c2(B)))


def power_energy(w, alpha, beta, g, z) -> float:
    return float(_impl.power_energy(_c1(w), _c1(alpha), float(beta), _c1(g), _c1(z)))


def power_energy_batch(w, alpha, beta, g, Z) -> np.ndarray:
    return np.asarray(
        _impl.power_energy_batch(_c1(w), _c1(alpha), float(beta), _c1(g), _c2(Z))
    )


def play_update(alpha, beta, g, c, prev, lo, hi) -> np.ndarray:
    return np.asarray(
        _impl.play_update(_c1(alpha), float(beta), _c1(g), float(c),
                          _c1(prev), _c1(lo), _c1(hi))
    )


def threshold_dissipation(w, sp, sm, a, b) -> float:
    return float(_impl.threshold_dissipation(_c1(w), float(sp), float(sm),
                                             _c1(a), _c1(b)))


def threshold_dissipation_batch(w, sp, sm, a, B) -> np.ndarray:
    return np.asarray(
        _impl.threshold_dissipation_batch(_c1(w), float(sp), float(sm),
                                          _c1(a), _c2(B))
    )


def drop_dissipation(areas, c_d, a, b) -> float:
    return float(_impl.drop_dissipation(_c1(areas), float(c_d), _c1(a), _c1(b)))


def drop_dissipation_batch(areas, c_d, a, B) -> np.ndarray:
    return np.asarray(
        _impl.drop_dissipation_batch(_c1(areas), float(c_d), _c1(a), _c2(B))
    )


def chain_energy_batch(c_springs, kappas, Z, load, control) -> np.ndarray:
    return np.asarray(
        _impl.chain_energy_batch(float(c_springs), _c1(kappas), _c2(Z),
                                 float(load), int(control))
    )


def well_energy(h, g, z) -> float:
    return float(_impl.well_energy(float(h), _c1(g), _c1(z)))


def well_energy_batch(h, g, Z) -> np.ndarray:
    return np.asarray(_impl.well_energy_batch(float(h), _c1(g), _c2(Z)))


def depressed_cubic_roots(p, q):
    return _impl.depressed_cubic_roots(float(p), float(q))


def i2_descent(h, g, c, z_start, z_prev, lo, hi, fixed, tol, max_sweeps):
    fixed_arr = np.ascontiguousarray(fixed, dtype=np.uint8)
    z, obj, sweeps = _impl.i2_descent(
        float(h), _c1(g), float(c), _c1(z_start), _c1(z_prev),
        _c1(lo), _c1(hi), fixed_arr, float(tol), int(max_sweeps)
    )
    return np.asarray(z), float(obj), int(sweeps)

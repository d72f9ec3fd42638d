"""Convex separable power-law model with weighted-l1 dissipation.

Energy and dissipation of a field sampled on cells with weights ``w_i``:

    I(t, z) = sum_i w_i (alpha_i |z_i|^beta - g_i(t) z_i) + gamma
    D(z0, z1) = c_d * sum_i w_i |z1_i - z0_i|

with ``beta > 1``, ``alpha_i > 0`` and a per-cell loading ``g_i`` affine in
time.  The incremental problem decouples per component and is solved in
closed form by a play-type update, and the stable set is an explicit
componentwise interval condition on the driving map
``h(z) = alpha*beta*|z|^(beta-2) z``, which makes this model the package's
primary oracle: both the solver path and the certifier can be checked
against exact answers.

Admissibility is a configurable compact box.  The box keeps the Lipschitz
bound of the energy rate finite and gives the automatic normalization offset
(the smallest constant making the energy nonnegative) a well-defined value;
both cancel from all energy differences and argmins.

The stable sets of this model are products of closed intervals, hence convex
and closed; certification therefore rests on exact convex analysis rather
than sampling.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..core import Model, StabilityVerdict
from ._shared import box_param, broadcast_param, in_box

__all__ = ["ConvexPointwiseModel"]


class ConvexPointwiseModel(Model):
    """Separable convex power-law energy with weighted-l1 dissipation (exact play updates and an exact stability test)."""

    name = "convex_pointwise"

    PARAM_DOCS = {
        "weights": "cell weights (list, default [1.0])",
        "alpha": "power coefficient per cell, > 0 (scalar or list, default 1.0)",
        "beta": "power exponent, > 1 (default 2.0)",
        "c_d": "dissipation constant, > 0 (default 1.0)",
        "load_offset": "loading g(t) = offset + slope*t, per cell (default 0.0)",
        "load_slope": "loading slope per cell (default 0.0)",
        "bounds": "admissible component box [lo, hi] (default [-10, 10])",
        "gamma": "'auto' or explicit normalization offset (default 'auto')",
    }

    def __init__(self, *, weights, alpha=1.0, beta=2.0, c_d=1.0,
                 load_offset=0.0, load_slope=0.0, bounds=(-10.0, 10.0),
                 gamma="auto", horizon=1.0):
        super().__init__(horizon)
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or len(w) < 1 or not np.all(w > 0):
            raise ValueError("weights must be a nonempty list of positive numbers")
        n = len(w)
        self._weights = w.copy()
        self._weights.setflags(write=False)
        self.alpha = broadcast_param(alpha, n, "alpha")
        if not np.all(self.alpha > 0):
            raise ValueError("alpha must be positive")
        self.beta = float(beta)
        if not self.beta > 1.0:
            raise ValueError("beta must exceed 1")
        self.c_d = float(c_d)
        if not self.c_d > 0:
            raise ValueError("c_d must be positive")
        self.load_offset = broadcast_param(load_offset, n, "load_offset")
        self.load_slope = broadcast_param(load_slope, n, "load_slope")
        self._lo, self._hi = box_param(bounds, n)
        if gamma == "auto":
            self.gamma = self._auto_gamma()
        else:
            self.gamma = float(gamma)
            if self.gamma < 0:
                raise ValueError("gamma must be nonnegative")

    @classmethod
    def from_config(cls, params: dict, horizon: float) -> "ConvexPointwiseModel":
        p = dict(params)
        p.setdefault("weights", [1.0])
        return cls(horizon=horizon, **p)

    # --- loading ------------------------------------------------------------
    def load_at(self, t: float) -> np.ndarray:
        return self.load_offset + self.load_slope * t

    def _auto_gamma(self) -> float:
        """Smallest offset making the energy nonnegative over box x [0, horizon].

        The unnormalized energy is separable in the components and affine in t
        at fixed state, so the joint minimum is attained at t in {0, horizon}
        with each component minimized over its interval (interior critical
        point of the smooth part, clipped to the box).
        """
        worst = 0.0
        for t in (0.0, self.horizon):
            g = self.load_at(t)
            ab = self.alpha * self.beta
            crit = np.sign(g) * (np.abs(g) / ab) ** (1.0 / (self.beta - 1.0))
            zs = np.clip(crit, self._lo, self._hi)
            total = 0.0
            for i in range(len(self._weights)):
                cand = [zs[i], self._lo[i], self._hi[i]]
                vals = [self.alpha[i] * abs(z) ** self.beta - g[i] * z for z in cand]
                total += self._weights[i] * min(vals)
            worst = min(worst, total)
        return max(0.0, -worst)

    # --- contract -----------------------------------------------------------
    def energy(self, t, z):
        return kernels.power_energy(self._weights, self.alpha, self.beta,
                                    self.load_at(t), z.values) + self.gamma

    def energy_rate(self, t, z):
        return float(-np.dot(self._weights, self.load_slope * z.values))

    def dissipation(self, z0, z1):
        return self.c_d * kernels.weighted_l1(self._weights, z0.values, z1.values)

    def is_admissible(self, z):
        return len(z) == len(self._weights) and in_box(z.values, self._lo, self._hi)

    @property
    def lipschitz_bound(self):
        bound = np.maximum(np.abs(self._lo), np.abs(self._hi))
        return float(np.dot(self._weights, np.abs(self.load_slope) * bound))

    @property
    def coercivity_const(self):
        return self.c_d

    @property
    def weights(self):
        return self._weights

    @property
    def admissible_bounds(self):
        return self._lo, self._hi

    # --- batch + oracle surface ----------------------------------------------
    def energy_batch(self, t, values):
        return kernels.power_energy_batch(self._weights, self.alpha, self.beta,
                                          self.load_at(t), values) + self.gamma

    def dissipation_batch(self, z0, values):
        return self.c_d * kernels.weighted_l1_batch(self._weights, z0.values, values)

    def exact_incremental_minimize(self, t, z_prev):
        vals = kernels.play_update(self.alpha, self.beta, self.load_at(t),
                                   self.c_d, z_prev.values, self._lo, self._hi)
        return self.state(vals)

    def driving_map(self, values: np.ndarray) -> np.ndarray:
        """h(z) = alpha*beta*|z|^(beta-2) z, the stability driving map."""
        ab = self.alpha * self.beta
        return ab * np.sign(values) * np.abs(values) ** (self.beta - 1.0)

    def stability_oracle(self, t, z):
        """Exact verdict: h(z_i) must lie in [g_i - c_d, g_i + c_d] per component.

        At a box face the blocked direction is exempt (the corresponding
        competitor is inadmissible), which reduces to the plain interval test
        in the interior.  The interval comparison carries a 1e-9 yield
        tolerance: solver iterates sit exactly on the interval endpoints, and
        a tolerance-sized overshoot can only produce a quadratically smaller
        energy violation.
        """
        g = self.load_at(t)
        h = self.driving_map(z.values)
        tol = 1e-9 * np.maximum(1.0, np.abs(g) + self.c_d)
        want_up = (h < g - self.c_d - tol) & (z.values < self._hi)
        want_dn = (h > g + self.c_d + tol) & (z.values > self._lo)
        bad = want_up | want_dn
        if not np.any(bad):
            return StabilityVerdict.stable()
        j = int(np.argmax(bad))
        target = g[j] - self.c_d if want_up[j] else g[j] + self.c_d
        ab = self.alpha[j] * self.beta
        zeta = float(np.sign(target) * (abs(target) / ab) ** (1.0 / (self.beta - 1.0)))
        zeta = min(max(zeta, self._lo[j]), self._hi[j])
        witness_vals = z.values.copy()
        witness_vals[j] = zeta
        witness = self.state(witness_vals)
        margin = self.energy(t, z) - self.energy(t, witness) - self.dissipation(z, witness)
        return StabilityVerdict.unstable(witness, component=j, margin=margin)

    def describe(self):
        out = super().describe()
        out.update({"beta": self.beta, "gamma": self.gamma, "c_d": self.c_d})
        return out

"""Nonconvex double-well model with a discrete gradient penalty.

A scalar field on a uniform 1-D mesh of ``n`` nodes with spacing ``h``:

    I(t, z) = sum_edges (h/2) ((z_{i+1} - z_i)/h)^2
              + sum_i h ((z_i^2 - 1)^2 - g_i(t) z_i) + gamma
    D(z0, z1) = c_d * sum_i h |z1_i - z0_i|

The double-well bulk term makes the incremental problem nonconvex, so no
exact stability test exists; solutions come from multistart descent and are
certified by competitor sampling.  Each coordinate section of the
incremental objective is a quartic plus an absolute-value kink whose exact
minimizer follows from the real roots of two cubics; the model exposes that
as its specialized local-descent hook.

Optional Dirichlet values pin the outermost nodes; otherwise the boundary is
natural.  Admissibility is a compact component box (default [-2, 2]), which
keeps the loading-rate bound finite and bounds the bulk term.

Unlike the convex power-law model, the stable sets here are nonconvex (the
two wells compete), so stability certificates are sampled evidence rather
than proofs, and the gradient penalty is what keeps near-constant states
dominant at this mesh scale.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..core import Model
from ._shared import box_param, broadcast_param, in_box

__all__ = ["GradientNonconvexModel"]


class GradientNonconvexModel(Model):
    """Nonconvex double-well field with a discrete gradient penalty; solved by multistart exact-coordinate descent."""

    name = "gradient_nonconvex"

    PARAM_DOCS = {
        "n_nodes": "number of mesh nodes, >= 2 (default 5)",
        "length": "domain length (default 1.0)",
        "c_d": "dissipation constant, > 0 (default 0.5)",
        "load_offset": "loading g(t, x_i) = offset_i + slope_i*t (default 0.0)",
        "load_slope": "loading slope per node (default 0.0)",
        "bounds": "admissible component box [lo, hi] (default [-2, 2])",
        "dirichlet": "null or [left, right] pinned boundary values",
        "gamma": "'auto' or explicit normalization offset (default 'auto')",
    }

    def __init__(self, *, n_nodes=5, length=1.0, c_d=0.5,
                 load_offset=0.0, load_slope=0.0, bounds=(-2.0, 2.0),
                 dirichlet=None, gamma="auto", horizon=1.0):
        super().__init__(horizon)
        n = int(n_nodes)
        if n < 2:
            raise ValueError("n_nodes must be >= 2")
        if not length > 0:
            raise ValueError("length must be positive")
        self.n_nodes = n
        self.h = float(length) / (n - 1)
        self.c_d = float(c_d)
        if not self.c_d > 0:
            raise ValueError("c_d must be positive")
        self._weights = np.full(n, self.h)
        self._weights.setflags(write=False)
        self.load_offset = broadcast_param(load_offset, n, "load_offset")
        self.load_slope = broadcast_param(load_slope, n, "load_slope")
        self._lo, self._hi = box_param(bounds, n)
        if dirichlet is None:
            self.dirichlet = None
            self._fixed = np.zeros(n, dtype=np.uint8)
        else:
            left, right = float(dirichlet[0]), float(dirichlet[1])
            if not (in_box(np.array([left]), self._lo[:1], self._hi[:1])
                    and in_box(np.array([right]), self._lo[-1:], self._hi[-1:])):
                raise ValueError("dirichlet values must lie in the admissible box")
            self.dirichlet = (left, right)
            self._fixed = np.zeros(n, dtype=np.uint8)
            self._fixed[0] = 1
            self._fixed[-1] = 1
        self._fixed.setflags(write=False)
        if gamma == "auto":
            self.gamma = self._auto_gamma()
        else:
            self.gamma = float(gamma)
            if self.gamma < 0:
                raise ValueError("gamma must be nonnegative")

    @classmethod
    def from_config(cls, params: dict, horizon: float) -> "GradientNonconvexModel":
        return cls(horizon=horizon, **params)

    def load_at(self, t: float) -> np.ndarray:
        return self.load_offset + self.load_slope * t

    def _auto_gamma(self) -> float:
        """Offset from the nodewise bulk minimum; the gradient term is >= 0."""
        worst = 0.0
        for t in (0.0, self.horizon):
            g = self.load_at(t)
            total = 0.0
            for i in range(self.n_nodes):
                cands = [self._lo[i], self._hi[i]]
                # stationary points of (z^2-1)^2 - g z: 4z^3 - 4z - g = 0
                for r in kernels.depressed_cubic_roots(-1.0, -g[i] / 4.0):
                    if self._lo[i] <= r <= self._hi[i]:
                        cands.append(r)
                total += self.h * min((z * z - 1.0) ** 2 - g[i] * z for z in cands)
            worst = min(worst, total)
        return max(0.0, -worst)

    # --- contract -----------------------------------------------------------
    def energy(self, t, z):
        return kernels.well_energy(self.h, self.load_at(t), z.values) + self.gamma

    def energy_rate(self, t, z):
        return float(-self.h * np.dot(self.load_slope, z.values))

    def dissipation(self, z0, z1):
        return self.c_d * kernels.weighted_l1(self._weights, z0.values, z1.values)

    def is_admissible(self, z):
        if len(z) != self.n_nodes or not in_box(z.values, self._lo, self._hi):
            return False
        if self.dirichlet is not None:
            left, right = self.dirichlet
            if z.values[0] != left or z.values[-1] != right:
                return False
        return True

    @property
    def lipschitz_bound(self):
        bound = np.maximum(np.abs(self._lo), np.abs(self._hi))
        return float(self.h * np.dot(np.abs(self.load_slope), bound))

    @property
    def coercivity_const(self):
        return self.c_d

    @property
    def weights(self):
        return self._weights

    @property
    def admissible_bounds(self):
        return self._lo, self._hi

    @property
    def fixed_components(self):
        return self._fixed

    # --- batch + descent surface ---------------------------------------------
    def energy_batch(self, t, values):
        return kernels.well_energy_batch(self.h, self.load_at(t), values) + self.gamma

    def dissipation_batch(self, z0, values):
        return self.c_d * kernels.weighted_l1_batch(self._weights, z0.values, values)

    def coordinate_descent(self, t, start, z_prev, tol, max_sweeps):
        vals, obj, _ = kernels.i2_descent(
            self.h, self.load_at(t), self.c_d, start, z_prev.values,
            self._lo, self._hi, self._fixed, tol, max_sweeps,
        )
        return vals, obj + self.gamma

    def describe(self):
        out = super().describe()
        out.update({"h": self.h, "gamma": self.gamma, "c_d": self.c_d,
                    "dirichlet": list(self.dirichlet) if self.dirichlet else None})
        return out

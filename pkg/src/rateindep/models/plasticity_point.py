"""Single material point, single-slip finite plasticity on SL(2).

The plastic transformation is confined to the one-parameter shear subgroup
``P(gamma) = I + gamma * e1 (x) e2`` (unit determinant for every slip
``gamma``), driven by a simple-shear strain path ``F(t) = I + s(t) e1 (x) e2``
with ``s`` affine in time.  Along the subgroup the left-invariant dissipation
metric reduces to

    D(gamma0, gamma1) = kappa * |gamma1 - gamma0|

(the slip coordinate is the logarithm of ``P0^{-1} P1``, exact for the
nilpotent shear generator), and the stored energy on the shear path is
``W = mu (s - gamma)^2 / 2``.  The incremental update is the classical
soft-threshold (elastic-predictor / plastic-corrector) map, available in
closed form and exposed both as the model's exact minimizer and as the
condensed constitutive update ``(gamma_old, F) -> (psi_red, gamma_new)``.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import Model, StabilityVerdict
from ._shared import box_param

__all__ = ["PlasticityPointModel"]


def _shear(coeff: float) -> np.ndarray:
    return np.array([[1.0, coeff], [0.0, 1.0]])


class PlasticityPointModel(Model):
    """Single-slip finite plasticity at one material point with a left-invariant slip metric; closed-form soft-threshold updates."""

    name = "plasticity_point"

    PARAM_DOCS = {
        "shear_modulus": "mu > 0 (default 1.0)",
        "yield_stress": "kappa > 0, dissipation per unit slip (default 0.5)",
        "shear_offset": "shear path s(t) = offset + slope*t (default 0.0)",
        "shear_slope": "shear path slope (default 1.0)",
        "bounds": "admissible slip box [lo, hi] (default [-10, 10])",
        "volume": "material-point volume weight (default 1.0)",
    }

    def __init__(self, *, shear_modulus=1.0, yield_stress=0.5,
                 shear_offset=0.0, shear_slope=1.0, bounds=(-10.0, 10.0),
                 volume=1.0, horizon=1.0):
        super().__init__(horizon)
        self.mu = float(shear_modulus)
        self.kappa = float(yield_stress)
        if self.mu <= 0 or self.kappa <= 0:
            raise ValueError("shear_modulus and yield_stress must be positive")
        self.shear_offset = float(shear_offset)
        self.shear_slope = float(shear_slope)
        self.volume = float(volume)
        if not self.volume > 0:
            raise ValueError("volume must be positive")
        self._weights = np.array([self.volume])
        self._weights.setflags(write=False)
        self._lo, self._hi = box_param(bounds, 1)

    @classmethod
    def from_config(cls, params: dict, horizon: float) -> "PlasticityPointModel":
        return cls(horizon=horizon, **params)

    def shear_at(self, t: float) -> float:
        return self.shear_offset + self.shear_slope * t

    # --- contract -----------------------------------------------------------
    def energy(self, t, z):
        r = self.shear_at(t) - z.values[0]
        return self.volume * 0.5 * self.mu * r * r

    def energy_rate(self, t, z):
        r = self.shear_at(t) - z.values[0]
        return self.volume * self.mu * r * self.shear_slope

    def dissipation(self, z0, z1):
        return self.volume * self.kappa * abs(z1.values[0] - z0.values[0])

    def is_admissible(self, z):
        return len(z) == 1 and self._lo[0] <= z.values[0] <= self._hi[0]

    @property
    def lipschitz_bound(self):
        s_max = max(abs(self.shear_at(0.0)), abs(self.shear_at(self.horizon)))
        g_max = max(abs(self._lo[0]), abs(self._hi[0]))
        return self.volume * self.mu * abs(self.shear_slope) * (s_max + g_max)

    @property
    def coercivity_const(self):
        return self.kappa

    @property
    def weights(self):
        return self._weights

    @property
    def admissible_bounds(self):
        return self._lo, self._hi

    # --- batch + oracle surface ----------------------------------------------
    def energy_batch(self, t, values):
        r = self.shear_at(t) - values[:, 0]
        return self.volume * 0.5 * self.mu * r * r

    def dissipation_batch(self, z0, values):
        return self.volume * self.kappa * np.abs(values[:, 0] - z0.values[0])

    def exact_incremental_minimize(self, t, z_prev):
        _, gamma_new = self.reduced_constitutive(z_prev.values[0],
                                                 _shear(self.shear_at(t)))
        gamma_new = min(max(gamma_new, self._lo[0]), self._hi[0])
        return self.state([gamma_new])

    def stability_oracle(self, t, z):
        gamma = z.values[0]
        stress = self.mu * (self.shear_at(t) - gamma)
        # 1e-9 yield tolerance: iterates sit exactly on the yield surface
        tol = 1e-9 * max(1.0, self.kappa)
        blocked_up = gamma >= self._hi[0]
        blocked_dn = gamma <= self._lo[0]
        if (abs(stress) <= self.kappa + tol
                or (stress > self.kappa and blocked_up)
                or (stress < -self.kappa and blocked_dn)):
            return StabilityVerdict.stable()
        witness = self.exact_incremental_minimize(t, z)
        margin = self.energy(t, z) - self.energy(t, witness) \
            - self.dissipation(z, witness)
        return StabilityVerdict.unstable(witness, component=0, margin=margin)

    # --- condensed constitutive functions ---------------------------------------
    def plastic_transform(self, gamma: float) -> np.ndarray:
        """P(gamma) = I + gamma * e1 (x) e2; det P = 1 exactly."""
        return _shear(gamma)

    def reduced_constitutive(self, gamma_old: float, F: np.ndarray):
        """Condensed incremental density and update on the shear path.

        Minimizes ``mu (s - gamma)^2 / 2 + kappa |gamma - gamma_old|`` over
        the slip; the minimizer is the soft-threshold update.  Returns the
        per-unit-volume minimum value and the new slip.
        """
        s = self._shear_coordinate(F, "strain path must be simple shear")
        drive = s - gamma_old
        step = math.copysign(max(0.0, abs(drive) - self.kappa / self.mu), drive)
        gamma_new = gamma_old + step
        psi = 0.5 * self.mu * (s - gamma_new) ** 2 \
            + self.kappa * abs(gamma_new - gamma_old)
        return psi, gamma_new

    @staticmethod
    def _shear_coordinate(M: np.ndarray, msg: str, tol: float = 1e-9) -> float:
        M = np.asarray(M, dtype=np.float64)
        if M.shape != (2, 2):
            raise ValueError(msg)
        if (abs(M[0, 0] - 1.0) > tol or abs(M[1, 1] - 1.0) > tol
                or abs(M[1, 0]) > tol):
            raise ValueError(msg)
        return float(M[0, 1])

    def group_dissipation(self, P0: np.ndarray, P1: np.ndarray) -> float:
        """Dissipation from the group-level definition: kappa times the slip
        coordinate of ``P0^{-1} P1`` (the logarithm along the shear subgroup)."""
        rel = np.linalg.solve(np.asarray(P0, dtype=np.float64),
                              np.asarray(P1, dtype=np.float64))
        coord = self._shear_coordinate(
            rel, "relative transformation leaves the shear subgroup")
        return self.kappa * abs(coord)

    def left_invariance_check(self, Q: np.ndarray, gamma0: float,
                              gamma1: float) -> float:
        """|D(Q P0, Q P1) - D(P0, P1)| for a unit-determinant prior Q."""
        Q = np.asarray(Q, dtype=np.float64)
        if Q.shape != (2, 2) or abs(np.linalg.det(Q) - 1.0) > 1e-12:
            raise ValueError("Q must be a 2x2 matrix with unit determinant")
        direct = self.kappa * abs(gamma1 - gamma0)
        moved = self.group_dissipation(Q @ _shear(gamma0), Q @ _shear(gamma1))
        return abs(moved - direct)

    def describe(self):
        out = super().describe()
        out.update({"mu": self.mu, "kappa": self.kappa, "volume": self.volume})
        return out

"""Two-phase bar: phase fractions with threshold dissipation.

Cells of a 1-D bar hold a phase fraction ``theta_i in [0, 1]``.  Both phases
share the elastic modulus; phase 2 carries a transformation strain ``eps_T``
and a chemical energy offset ``w``.  After eliminating the elastic strains
(uniform stress), the reduced energy depends on the fractions only through
the transformed mass ``m = sum_i w_i theta_i``:

    displacement control:  I(t, theta) = E (d(t) - eps_T m)^2 / (2 L) + w m
    force control:         I(t, theta) = -f(t)^2 L / (2 E) + (w - f(t) eps_T) m

with ``L = sum_i w_i``, so the reduced energy is quadratic in ``theta``.
Transformation dissipation is the threshold function

    D(z0, z1) = sum_i w_i max(sigma_plus * v_i, -sigma_minus * v_i),
    v = z1 - z0,

which is convex, positively homogeneous, and bounded below by
``min(sigma_plus, sigma_minus) |v|``.

Because the energy is a convex function of ``m`` alone and all cells share
thresholds, the incremental problem reduces to a scalar convex problem in
``m`` (solved exactly) whose optimizer is distributed over the cells; the
same reduction yields an exact stability test.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..core import EquilibriumModel, StabilityVerdict

__all__ = ["TwoPhaseModel"]


class TwoPhaseModel(EquilibriumModel):
    """Two-phase elastic bar with threshold transformation dissipation; reduced energy quadratic in the phase fractions."""

    name = "two_phase"

    PARAM_DOCS = {
        "weights": "cell lengths (list, default [1.0])",
        "modulus": "elastic modulus E > 0 (default 1.0)",
        "transform_strain": "transformation strain eps_T (default 1.0)",
        "phase_offset": "chemical energy offset w of phase 2 (default 0.1)",
        "sigma_plus": "forward transformation threshold > 0 (default 1.0)",
        "sigma_minus": "reverse transformation threshold > 0 (default 1.0)",
        "control": "'displacement' (end displacement) or 'force' (default displacement)",
        "load_offset": "load(t) = offset + slope*t (default 0.0)",
        "load_slope": "load slope (default 1.0)",
        "gamma": "'auto' or explicit normalization offset (default 'auto')",
    }

    def __init__(self, *, weights, modulus=1.0, transform_strain=1.0,
                 phase_offset=0.1, sigma_plus=1.0, sigma_minus=1.0,
                 control="displacement", load_offset=0.0, load_slope=1.0,
                 gamma="auto", horizon=1.0):
        super().__init__(horizon)
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or len(w) < 1 or not np.all(w > 0):
            raise ValueError("weights must be a nonempty list of positive numbers")
        self._weights = w.copy()
        self._weights.setflags(write=False)
        self.total_length = float(np.sum(w))
        self.modulus = float(modulus)
        self.transform_strain = float(transform_strain)
        self.phase_offset = float(phase_offset)
        self.sigma_plus = float(sigma_plus)
        self.sigma_minus = float(sigma_minus)
        if self.modulus <= 0 or self.sigma_plus <= 0 or self.sigma_minus <= 0:
            raise ValueError("modulus and thresholds must be positive")
        if control not in ("displacement", "force"):
            raise ValueError("control must be 'displacement' or 'force'")
        self.control = control
        self.load_offset = float(load_offset)
        self.load_slope = float(load_slope)
        n = len(w)
        self._lo = np.zeros(n)
        self._hi = np.ones(n)
        self._lo.setflags(write=False)
        self._hi.setflags(write=False)
        if gamma == "auto":
            self.gamma = self._auto_gamma()
        else:
            self.gamma = float(gamma)
            if self.gamma < 0:
                raise ValueError("gamma must be nonnegative")

    @classmethod
    def from_config(cls, params: dict, horizon: float) -> "TwoPhaseModel":
        p = dict(params)
        p.setdefault("weights", [1.0])
        return cls(horizon=horizon, **p)

    # --- reduced quadratic in the transformed mass m -------------------------
    def load_at(self, t: float) -> float:
        return self.load_offset + self.load_slope * t

    def mass(self, values: np.ndarray) -> float:
        return float(np.dot(self._weights, values))

    def _energy_of_mass(self, t: float, m: float) -> float:
        load = self.load_at(t)
        if self.control == "displacement":
            r = load - self.transform_strain * m
            return 0.5 * self.modulus * r * r / self.total_length + self.phase_offset * m
        quad = -0.5 * load * load * self.total_length / self.modulus
        return quad + (self.phase_offset - load * self.transform_strain) * m

    def _energy_slope(self, t: float, m: float) -> float:
        """d/dm of the reduced energy."""
        load = self.load_at(t)
        if self.control == "displacement":
            e = self.modulus * self.transform_strain
            return -e * (load - self.transform_strain * m) / self.total_length \
                + self.phase_offset
        return self.phase_offset - load * self.transform_strain

    def _mass_curvature(self) -> float:
        if self.control == "displacement":
            return self.modulus * self.transform_strain ** 2 / self.total_length
        return 0.0

    def _auto_gamma(self) -> float:
        worst = 0.0
        for t in (0.0, self.horizon):
            cands = [0.0, self.total_length]
            a2 = self._mass_curvature()
            if a2 > 0:
                m0 = self._energy_slope(t, 0.0)
                vertex = -m0 / a2
                if 0.0 < vertex < self.total_length:
                    cands.append(vertex)
            worst = min(worst, min(self._energy_of_mass(t, m) for m in cands))
        return max(0.0, -worst)

    # --- contract -----------------------------------------------------------
    def energy(self, t, z):
        return self._energy_of_mass(t, self.mass(z.values)) + self.gamma

    def energy_rate(self, t, z):
        load = self.load_at(t)
        m = self.mass(z.values)
        if self.control == "displacement":
            r = load - self.transform_strain * m
            return self.modulus * r * self.load_slope / self.total_length
        return (-load * self.load_slope * self.total_length / self.modulus
                - self.load_slope * self.transform_strain * m)

    def dissipation(self, z0, z1):
        return kernels.threshold_dissipation(self._weights, self.sigma_plus,
                                             self.sigma_minus, z0.values, z1.values)

    def is_admissible(self, z):
        return (len(z) == len(self._weights)
                and bool(np.all(z.values >= 0.0) and np.all(z.values <= 1.0)))

    @property
    def lipschitz_bound(self):
        worst = 0.0
        for t in (0.0, self.horizon):
            for m in (0.0, self.total_length):
                load = self.load_at(t)
                if self.control == "displacement":
                    r = load - self.transform_strain * m
                    rate = self.modulus * r * self.load_slope / self.total_length
                else:
                    rate = (-load * self.load_slope * self.total_length / self.modulus
                            - self.load_slope * self.transform_strain * m)
                worst = max(worst, abs(rate))
        return worst

    @property
    def coercivity_const(self):
        return min(self.sigma_plus, self.sigma_minus)

    @property
    def weights(self):
        return self._weights

    @property
    def admissible_bounds(self):
        return self._lo, self._hi

    # --- batch surface --------------------------------------------------------
    def energy_batch(self, t, values):
        masses = values @ self._weights
        load = self.load_at(t)
        if self.control == "displacement":
            r = load - self.transform_strain * masses
            out = 0.5 * self.modulus * r * r / self.total_length \
                + self.phase_offset * masses
        else:
            out = (-0.5 * load * load * self.total_length / self.modulus
                   + (self.phase_offset - load * self.transform_strain) * masses)
        return out + self.gamma

    def dissipation_batch(self, z0, values):
        return kernels.threshold_dissipation_batch(
            self._weights, self.sigma_plus, self.sigma_minus, z0.values, values)

    # --- exact incremental solve ----------------------------------------------
    def _optimal_mass(self, t: float, m0: float) -> float:
        """Exact minimizer over [0, L] of energy(m) + transformation cost from m0."""
        slope0 = self._energy_slope(t, m0)
        a2 = self._mass_curvature()
        if -self.sigma_plus <= slope0 <= self.sigma_minus:
            return m0
        if slope0 < -self.sigma_plus:
            if a2 > 0:
                m_star = m0 + (-self.sigma_plus - slope0) / a2
            else:
                m_star = self.total_length
            return min(max(m_star, m0), self.total_length)
        if a2 > 0:
            m_star = m0 + (self.sigma_minus - slope0) / a2
        else:
            m_star = 0.0
        return min(max(m_star, 0.0), m0)

    def _distribute(self, prev: np.ndarray, m_target: float) -> np.ndarray:
        """Realize a mass move with same-direction cell updates, smallest first
        components (increases fill from the last cell, decreases drain from
        the first), which is the lexicographically smallest minimizer."""
        theta = prev.copy()
        w = self._weights
        dm = m_target - float(np.dot(w, prev))
        if dm > 0:
            for i in range(len(theta) - 1, -1, -1):
                room = (1.0 - theta[i]) * w[i]
                take = min(room, dm)
                if take > 0:
                    theta[i] = min(1.0, theta[i] + take / w[i])
                    dm -= take
                if dm <= 0:
                    break
        elif dm < 0:
            dm = -dm
            for i in range(len(theta)):
                avail = theta[i] * w[i]
                take = min(avail, dm)
                if take > 0:
                    theta[i] = max(0.0, theta[i] - take / w[i])
                    dm -= take
                if dm <= 0:
                    break
        return theta

    def exact_incremental_minimize(self, t, z_prev):
        m0 = self.mass(z_prev.values)
        m_star = self._optimal_mass(t, m0)
        if m_star == m0:
            return z_prev
        return self.state(self._distribute(z_prev.values, m_star))

    def stability_oracle(self, t, z):
        """Exact: the mass coordinate must be a constrained minimum of the
        reduced energy plus the directional transformation cost.  A 1e-9
        yield tolerance absorbs iterates sitting exactly on the thresholds
        (any overshoot that small yields a quadratically smaller violation).
        """
        m = self.mass(z.values)
        slope = self._energy_slope(t, m)
        tol = 1e-9 * max(1.0, self.sigma_plus + self.sigma_minus + abs(slope))
        can_up = bool(np.any(z.values < 1.0))
        can_dn = bool(np.any(z.values > 0.0))
        violated_up = slope < -self.sigma_plus - tol and can_up
        violated_dn = slope > self.sigma_minus + tol and can_dn
        if not (violated_up or violated_dn):
            return StabilityVerdict.stable()
        m_star = self._optimal_mass(t, m)
        witness = self.state(self._distribute(z.values, m_star))
        margin = self.energy(t, z) - self.energy(t, witness) \
            - self.dissipation(z, witness)
        return StabilityVerdict.unstable(witness, margin=margin)

    # --- equilibrium elimination ------------------------------------------------
    def reduced_energy(self, t, z):
        """Eliminate the strains by an explicit saddle/linear solve.

        Returns the reduced energy and the node displacements of the chain
        (cells laid end to end); cross-validates the closed quadratic form.
        """
        theta = z.values
        n = len(theta)
        w = self._weights
        E = self.modulus
        load = self.load_at(t)
        if self.control == "displacement":
            A = np.zeros((n + 1, n + 1))
            b = np.zeros(n + 1)
            A[:n, :n] = np.diag(w * E)
            A[:n, n] = -w
            A[n, :n] = w
            b[:n] = w * E * self.transform_strain * theta
            b[n] = load
            sol = np.linalg.solve(A, b)
            strains = sol[:n]
            value = float(np.dot(w, 0.5 * E * (strains - self.transform_strain * theta) ** 2
                                 + self.phase_offset * theta))
        else:
            strains = self.transform_strain * theta + load / E
            value = float(np.dot(w, 0.5 * E * (strains - self.transform_strain * theta) ** 2
                                 + self.phase_offset * theta))
            value -= load * float(np.dot(w, strains))
        phi = np.concatenate(([0.0], np.cumsum(w * strains)))
        return value + self.gamma, phi

    def total_energy(self, t, strains, z):
        """Full energy at explicit strains (for brute-force cross checks)."""
        theta = z.values
        w = self._weights
        E = self.modulus
        value = float(np.dot(w, 0.5 * E * (strains - self.transform_strain * theta) ** 2
                             + self.phase_offset * theta))
        if self.control == "force":
            value -= self.load_at(t) * float(np.dot(w, strains))
        return value + self.gamma

    def describe(self):
        out = super().describe()
        out.update({"control": self.control, "gamma": self.gamma,
                    "sigma_plus": self.sigma_plus, "sigma_minus": self.sigma_minus})
        return out

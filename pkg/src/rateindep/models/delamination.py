"""Glued spring chain with irreversible glue degradation.

A series chain of elastic segments (stiffnesses ``k_j``) joined at ``m``
glue interfaces.  Interface ``i`` carries a glue fraction ``z_i`` and acts
as a spring of stiffness ``z_i * kappa_i`` across the interface jump; the
wall end is fixed and the far end is loaded by a prescribed displacement or
a force, affine in time.  Breaking glue dissipates

    D(z0, z1) = c_d * sum_i a_i (z0_i - z1_i)   if z1 <= z0 componentwise,
    D(z0, z1) = +inf                            otherwise,

so healing is infeasible and every admissible evolution is componentwise
nonincreasing.  The full energy is affine in ``z`` at a fixed deformation,
hence the reduced energy (a series-compliance closed form, cross-checked
against an assembled equilibrium solve) is concave in ``z`` and the
incremental problem attains its minimum at a vertex of the reachable box:
the exact solver enumerates the ``2^m`` keep/break patterns.

Under a dead load the energy is unbounded as the glue vanishes, so force
control requires a positive glue floor (``glue_floor``); displacement
control admits fully broken glue (the reduced energy degenerates to zero).
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .. import kernels
from ..core import EquilibriumModel, SingularSystemError, StabilityVerdict

__all__ = ["DelaminationModel"]


class DelaminationModel(EquilibriumModel):
    """Glued spring chain with irreversible glue loss (asymmetric dissipation, healing infeasible); exact vertex solver."""

    name = "delamination"

    PARAM_DOCS = {
        "segments": "segment stiffnesses, >= 2 entries (default [1.0, 1.0])",
        "glue_kappa": "glue stiffness per interface (len(segments)-1 entries)",
        "glue_area": "interface areas a_i (default 1.0 each)",
        "c_d": "dissipation per unit destroyed glue, > 0 (default 1.0)",
        "control": "'displacement' or 'force' (default displacement)",
        "load_offset": "load(t) = offset + slope*t (default 0.0)",
        "load_slope": "load slope (default 1.0)",
        "glue_floor": "minimum admissible glue fraction; must be > 0 for force control",
        "gamma": "'auto' or explicit normalization offset (default 'auto')",
    }

    def __init__(self, *, segments, glue_kappa=None, glue_area=None, c_d=1.0,
                 control="displacement", load_offset=0.0, load_slope=1.0,
                 glue_floor=None, gamma="auto", horizon=1.0):
        super().__init__(horizon)
        segs = np.asarray(segments, dtype=np.float64)
        if segs.ndim != 1 or len(segs) < 2 or not np.all(segs > 0):
            raise ValueError("segments must be >= 2 positive stiffnesses")
        self.segments = segs.copy()
        self.segments.setflags(write=False)
        m = len(segs) - 1
        kappa = np.asarray(glue_kappa if glue_kappa is not None else np.ones(m),
                           dtype=np.float64)
        area = np.asarray(glue_area if glue_area is not None else np.ones(m),
                          dtype=np.float64)
        if kappa.shape != (m,) or not np.all(kappa > 0):
            raise ValueError(f"glue_kappa must be {m} positive stiffnesses")
        if area.shape != (m,) or not np.all(area > 0):
            raise ValueError(f"glue_area must be {m} positive areas")
        self.glue_kappa = kappa.copy()
        self.glue_kappa.setflags(write=False)
        self._weights = area.copy()
        self._weights.setflags(write=False)
        self.c_d = float(c_d)
        if not self.c_d > 0:
            raise ValueError("c_d must be positive")
        if control not in ("displacement", "force"):
            raise ValueError("control must be 'displacement' or 'force'")
        self.control = control
        if glue_floor is None:
            glue_floor = 0.05 if control == "force" else 0.0
        self.glue_floor = float(glue_floor)
        if control == "force" and not self.glue_floor > 0:
            raise ValueError("force control requires a positive glue_floor "
                             "(energy is unbounded as the glue vanishes)")
        if not 0.0 <= self.glue_floor < 1.0:
            raise ValueError("glue_floor must lie in [0, 1)")
        self.load_offset = float(load_offset)
        self.load_slope = float(load_slope)
        self.spring_compliance = float(np.sum(1.0 / segs))
        self._lo = np.full(m, self.glue_floor)
        self._hi = np.ones(m)
        self._lo.setflags(write=False)
        self._hi.setflags(write=False)
        if gamma == "auto":
            self.gamma = self._auto_gamma()
        else:
            self.gamma = float(gamma)
            if self.gamma < 0:
                raise ValueError("gamma must be nonnegative")

    @classmethod
    def from_config(cls, params: dict, horizon: float) -> "DelaminationModel":
        p = dict(params)
        p.setdefault("segments", [1.0, 1.0])
        return cls(horizon=horizon, **p)

    # --- closed-form reduced energy -------------------------------------------
    def load_at(self, t: float) -> float:
        return self.load_offset + self.load_slope * t

    def _compliance(self, values: np.ndarray) -> float:
        zk = values * self.glue_kappa
        if np.any(zk == 0.0):
            return math.inf
        return self.spring_compliance + float(np.sum(1.0 / zk))

    def _energy_values(self, t: float, values: np.ndarray) -> float:
        comp = self._compliance(values)
        load = self.load_at(t)
        if self.control == "displacement":
            if math.isinf(comp):
                return self.gamma
            return 0.5 * load * load / comp + self.gamma
        if math.isinf(comp):
            raise SingularSystemError(
                "force control with fully broken glue: end segment detaches")
        return -0.5 * load * load * comp + self.gamma

    def _auto_gamma(self) -> float:
        if self.control == "displacement":
            return 0.0
        comp_max = self.spring_compliance + float(
            np.sum(1.0 / (self.glue_floor * self.glue_kappa)))
        load_max = max(abs(self.load_at(0.0)), abs(self.load_at(self.horizon)))
        return 0.5 * load_max * load_max * comp_max

    # --- contract -----------------------------------------------------------
    def energy(self, t, z):
        return self._energy_values(t, z.values)

    def energy_rate(self, t, z):
        comp = self._compliance(z.values)
        load = self.load_at(t)
        if self.control == "displacement":
            if math.isinf(comp):
                return 0.0
            return load * self.load_slope / comp
        return -load * self.load_slope * comp

    def dissipation(self, z0, z1):
        return kernels.drop_dissipation(self._weights, self.c_d, z0.values, z1.values)

    def is_admissible(self, z):
        return (len(z) == len(self._weights)
                and bool(np.all(z.values >= self.glue_floor)
                         and np.all(z.values <= 1.0)))

    @property
    def lipschitz_bound(self):
        load_max = max(abs(self.load_at(0.0)), abs(self.load_at(self.horizon)))
        if self.control == "displacement":
            comp_min = self._compliance(np.ones(len(self._weights)))
            return load_max * abs(self.load_slope) / comp_min
        comp_max = self.spring_compliance + float(
            np.sum(1.0 / (self.glue_floor * self.glue_kappa)))
        return load_max * abs(self.load_slope) * comp_max

    @property
    def coercivity_const(self):
        return self.c_d

    @property
    def weights(self):
        return self._weights

    @property
    def admissible_bounds(self):
        return self._lo, self._hi

    # --- batch surface --------------------------------------------------------
    def energy_batch(self, t, values):
        out = kernels.chain_energy_batch(
            self.spring_compliance, self.glue_kappa, values, self.load_at(t),
            0 if self.control == "displacement" else 1)
        if self.control == "force" and np.any(np.isinf(out)):
            raise SingularSystemError(
                "force control with fully broken glue: end segment detaches")
        return out + self.gamma

    def dissipation_batch(self, z0, values):
        return kernels.drop_dissipation_batch(self._weights, self.c_d,
                                              z0.values, values)

    # --- exact incremental solve ------------------------------------------------
    def _vertices(self, upper: np.ndarray) -> np.ndarray:
        axes = []
        for i, u in enumerate(upper):
            lo = self._lo[i]
            axes.append((u,) if u <= lo else (u, lo))
        return np.array(list(itertools.product(*axes)), dtype=np.float64)

    def exact_incremental_minimize(self, t, z_prev):
        """Vertex enumeration over the reachable box [floor, z_prev].

        Exact because the reduced energy is concave in the glue fractions and
        the dissipation is linear on the feasible (nonincreasing) cone.  Ties
        prefer the least destroyed glue, then the lexicographically smallest
        pattern.
        """
        verts = self._vertices(z_prev.values)
        obj = self.energy_batch(t, verts) + self.dissipation_batch(z_prev, verts)
        best = float(np.min(obj))
        tie = np.flatnonzero(obj <= best + 1e-12)
        diss = self.dissipation_batch(z_prev, verts[tie])
        dbest = float(np.min(diss))
        tie = tie[diss <= dbest + 1e-12]
        order = np.lexsort(np.flipud(verts[tie].T))
        return self.state(verts[tie[order[0]]])

    def stability_oracle(self, t, z):
        """Exact by the same vertex argument, with competitors below z."""
        verts = self._vertices(z.values)
        here = self.energy(t, z)
        obj = self.energy_batch(t, verts) + self.dissipation_batch(z, verts)
        j = int(np.argmin(obj))
        if here <= float(obj[j]) + 1e-14 * max(1.0, abs(here)):
            return StabilityVerdict.stable()
        witness = self.state(verts[j])
        return StabilityVerdict.unstable(witness, margin=here - float(obj[j]))

    # --- assembled equilibrium (cross-check path) --------------------------------
    def _node_count(self) -> int:
        return 2 * len(self._weights) + 2

    def total_energy(self, t, phi, z):
        """Full energy at an explicit node displacement vector.

        Nodes: wall, then (left, right) per interface, then the end node.
        """
        phi = np.asarray(phi, dtype=np.float64)
        m = len(self._weights)
        if phi.shape != (self._node_count(),):
            raise ValueError(f"phi must have {self._node_count()} nodes")
        val = 0.0
        for j, k in enumerate(self.segments):
            left = phi[0] if j == 0 else phi[2 * j]
            right = phi[2 * j + 1]
            val += 0.5 * k * (right - left) ** 2
        for i in range(m):
            jump = phi[2 * i + 2] - phi[2 * i + 1]
            val += z.values[i] * 0.5 * self.glue_kappa[i] * jump * jump
        if self.control == "force":
            val -= self.load_at(t) * phi[-1]
        return val + self.gamma

    def reduced_energy(self, t, z):
        """Assemble and solve the equilibrium system; returns (I, phi).

        Free DOFs are the interface node pairs (plus the end node under force
        control).  A singular but consistent system (floating interior piece
        under displacement control) is resolved by the minimum-norm solution;
        an inconsistent one raises ``SingularSystemError`` naming the mode.
        """
        m = len(self._weights)
        load = self.load_at(t)
        nfree = 2 * m + (1 if self.control == "force" else 0)
        K = np.zeros((nfree, nfree))
        b = np.zeros(nfree)
        const = 0.0

        def dof(node_idx):
            # node layout: 0 = wall, 1..2m = interface pairs, 2m+1 = end
            if node_idx == 0:
                return None, 0.0
            if node_idx == 2 * m + 1:
                if self.control == "force":
                    return nfree - 1, 0.0
                return None, load
            return node_idx - 1, 0.0

        def add_spring(k, na, nb):
            nonlocal const
            ia, va = dof(na)
            ib, vb = dof(nb)
            if ia is not None:
                K[ia, ia] += k
            if ib is not None:
                K[ib, ib] += k
            if ia is not None and ib is not None:
                K[ia, ib] -= k
                K[ib, ia] -= k
            if ia is None and ib is not None:
                b[ib] += k * va
            if ib is None and ia is not None:
                b[ia] += k * vb
            if ia is None and ib is None:
                const += 0.5 * k * (vb - va) ** 2

        for j, k in enumerate(self.segments):
            na = 0 if j == 0 else 2 * j
            nb = 2 * j + 1
            add_spring(k, na, nb)
        for i in range(m):
            keff = z.values[i] * self.glue_kappa[i]
            if keff > 0:
                add_spring(keff, 2 * i + 1, 2 * i + 2)
        if self.control == "force":
            b[nfree - 1] += load

        eigs = np.linalg.eigvalsh(K)
        scale = max(1.0, float(eigs[-1]))
        if eigs[0] <= 1e-12 * scale:
            x, residual, _, _ = np.linalg.lstsq(K, b, rcond=None)
            if float(np.linalg.norm(K @ x - b)) > 1e-9 * max(1.0, float(np.linalg.norm(b))):
                broken = [i for i in range(m) if z.values[i] * self.glue_kappa[i] == 0.0]
                raise SingularSystemError(
                    f"equilibrium system is singular and loaded: chain pieces "
                    f"detached at interfaces {broken} carry a net load")
        else:
            x = np.linalg.solve(K, b)

        phi = np.zeros(self._node_count())
        for node in range(1, self._node_count()):
            i, v = dof(node)
            phi[node] = x[i] if i is not None else v
        value = self.total_energy(t, phi, z)
        return value, phi

    def describe(self):
        out = super().describe()
        out.update({"control": self.control, "gamma": self.gamma,
                    "c_d": self.c_d, "glue_floor": self.glue_floor})
        return out

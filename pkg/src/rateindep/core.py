"""Domain types for rate-independent evolutions.

A rate-independent evolution is driven by two ingredients: a time-dependent
stored-energy functional ``I(t, z)`` and a dissipation distance ``D(z0, z1)``
that satisfies the triangle inequality, may be asymmetric, and may take the
value ``+inf``.  States are finite dimensional: a vector of components plus
positive quadrature weights, so every integral-type functional is a weighted
sum and the natural state norm is the weighted l1 norm.

Trajectories are piecewise constant on a time grid.  Between nodes they are
either continuous from the left (each open interval carries the value of its
right endpoint) or continuous from the right (value of the left endpoint);
the two variants agree at the nodes.  Total dissipation over a node interval
is the sum of the node-to-node jumps, which for a piecewise-constant
trajectory and a triangle-inequality distance equals the supremum over all
partitions of the interval.

All types are immutable after construction and safe to share across threads;
models are required to be reentrant (no interior mutable state across calls).
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

__all__ = [
    "State",
    "TimeGrid",
    "Trajectory",
    "Model",
    "EquilibriumModel",
    "StabilityVerdict",
    "TimeReparametrizedModel",
    "InadmissibleStateError",
    "GridNodeError",
    "SingularSystemError",
    "total_dissipation",
    "refine_dyadic",
]


class InadmissibleStateError(ValueError):
    """A state violates the owning model's admissibility predicate."""


class GridNodeError(ValueError):
    """A time that must be a grid node is not one."""


class SingularSystemError(RuntimeError):
    """An equilibrium system is singular; the message names the free mode."""


def _as_readonly(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class State:
    """Internal-state vector with per-component quadrature weights.

    Components carry model-dependent meaning (phase fraction, glue fraction,
    plastic slip, nodal value of a field); weights are the cell measures used
    by integral-type functionals.  Both arrays are copied and frozen.
    """

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values, "values"))
        object.__setattr__(self, "weights", _as_readonly(self.weights, "weights"))
        if len(self.values) < 1:
            raise ValueError("a state needs at least one component")
        if len(self.values) != len(self.weights):
            raise ValueError(
                f"values and weights must have equal length, "
                f"got {len(self.values)} and {len(self.weights)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("state components must be finite")
        if not (np.all(np.isfinite(self.weights)) and np.all(self.weights > 0)):
            raise ValueError("all weights must be positive and finite")

    def __len__(self) -> int:
        return len(self.values)

    def weighted_l1_norm(self) -> float:
        return float(np.dot(self.weights, np.abs(self.values)))

    def weighted_l1_distance(self, other: "State") -> float:
        return float(np.dot(self.weights, np.abs(other.values - self.values)))

    def with_values(self, values) -> "State":
        return State(values, self.weights)

    def allclose(self, other: "State", tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=tol))


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing partition ``0 = t_0 < t_1 < ... < t_N = T``."""

    times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _as_readonly(self.times, "times"))
        if len(self.times) < 2:
            raise ValueError("grid requires >= 2 nodes")
        if self.times[0] != 0.0:
            raise ValueError("grid must start at t = 0")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("grid times must be strictly increasing")

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def fineness(self) -> float:
        """Largest step ``max_j (t_j - t_{j-1})``."""
        return float(np.max(np.diff(self.times)))

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def __len__(self) -> int:
        return len(self.times)

    def node_index(self, t: float) -> int:
        """Index of the grid node at time ``t``; rejects non-node times."""
        times = self.times
        atol = max(1e-12, 1e-12 * abs(self.T))
        i = int(np.searchsorted(times, t))
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(times) and abs(times[j] - t) <= atol:
                return j
        raise GridNodeError(f"t = {t!r} is not a node of the grid")

    def contains_node(self, t: float) -> bool:
        try:
            self.node_index(t)
            return True
        except GridNodeError:
            return False


def refine_dyadic(grid: TimeGrid) -> TimeGrid:
    """Insert the midpoint of every interval; halves the fineness.

    The output contains the input nodes as a subset, so repeated refinement
    produces a hierarchical family of grids.
    """
    t = grid.times
    mids = 0.5 * (t[:-1] + t[1:])
    out = np.empty(2 * len(t) - 1, dtype=np.float64)
    out[0::2] = t
    out[1::2] = mids
    return TimeGrid(out)


Continuity = Literal["left", "right"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Piecewise-constant-in-time state path on a grid.

    ``continuity="left"`` makes the path continuous from the left (on each
    interval ``(t_{k-1}, t_k]`` it takes the value of node ``k``);
    ``continuity="right"`` makes it continuous from the right (value of node
    ``k-1`` on ``[t_{k-1}, t_k)``).  Both agree at the nodes.
    """

    grid: TimeGrid
    states: tuple
    continuity: Continuity = "left"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != len(self.grid):
            raise ValueError(
                f"need one state per grid node: {len(self.states)} states "
                f"for {len(self.grid)} nodes"
            )
        if self.continuity not in ("left", "right"):
            raise ValueError("continuity must be 'left' or 'right'")
        ncomp = len(self.states[0])
        w0 = self.states[0].weights
        for s in self.states[1:]:
            if len(s) != ncomp or not np.array_equal(s.weights, w0):
                raise ValueError("all states must share component count and weights")

    def evaluate(self, t: float) -> State:
        """Piecewise-constant evaluation per the continuity flag."""
        times = self.grid.times
        if t < times[0] or t > times[-1]:
            raise ValueError(f"t = {t!r} outside [0, {self.grid.T}]")
        if self.continuity == "left":
            k = int(np.searchsorted(times, t, side="left"))
        else:
            k = int(np.searchsorted(times, t, side="right")) - 1
        return self.states[k]

    def node_state(self, k: int) -> State:
        return self.states[k]

    def switched(self, continuity: Continuity) -> "Trajectory":
        return Trajectory(self.grid, self.states, continuity)


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of an exact stability test: stable, unstable (with witness), or unknown."""

    status: Literal["stable", "unstable", "unknown"]
    witness: Optional[State] = None
    component: Optional[int] = None
    margin: Optional[float] = None

    @staticmethod
    def stable(margin: Optional[float] = None) -> "StabilityVerdict":
        return StabilityVerdict("stable", margin=margin)

    @staticmethod
    def unstable(witness: State, component: Optional[int] = None,
                 margin: Optional[float] = None) -> "StabilityVerdict":
        return StabilityVerdict("unstable", witness=witness, component=component,
                                margin=margin)

    @staticmethod
    def unknown() -> "StabilityVerdict":
        return StabilityVerdict("unknown")


_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


class Model(abc.ABC):
    """Bundle of stored energy, its time rate, dissipation distance, and admissibility.

    Contract:

    * ``dissipation`` satisfies the triangle inequality, ``D(z, z) = 0``, and
      coercivity ``D(z0, z1) >= coercivity_const * ||z1 - z0||`` in the
      weighted l1 norm.  Symmetry is NOT assumed, and ``+inf`` is a legal
      value (propagated, never clamped).
    * ``energy`` is nonnegative for admissible states when the model's
      normalization offset is computed automatically, and
      ``|energy_rate(t, z)| <= lipschitz_bound`` whenever the energy is
      finite.  Loadings are defined on ``[0, horizon]``.
    * Implementations must be pure: repeated calls with equal inputs return
      equal values, and no mutable state is shared across calls.
    """

    name = "model"

    def __init__(self, horizon: float):
        if not (horizon > 0 and math.isfinite(horizon)):
            raise ValueError("horizon must be positive and finite")
        self.horizon = float(horizon)

    # --- required surface -------------------------------------------------
    @abc.abstractmethod
    def energy(self, t: float, z: State) -> float:
        """Stored energy ``I(t, z)``, possibly ``+inf``."""

    @abc.abstractmethod
    def energy_rate(self, t: float, z: State) -> float:
        """Partial time derivative of the stored energy at frozen state."""

    @abc.abstractmethod
    def dissipation(self, z0: State, z1: State) -> float:
        """Dissipation distance ``D(z0, z1) in [0, +inf]``."""

    @abc.abstractmethod
    def is_admissible(self, z: State) -> bool:
        """Admissibility predicate (component bounds plus model constraints)."""

    @property
    @abc.abstractmethod
    def lipschitz_bound(self) -> float:
        """Bound on ``|energy_rate|`` over admissible states and [0, horizon]."""

    @property
    @abc.abstractmethod
    def coercivity_const(self) -> float:
        """Constant ``c > 0`` with ``D(z0, z1) >= c ||z1 - z0||`` (weighted l1)."""

    @property
    @abc.abstractmethod
    def weights(self) -> np.ndarray:
        """Quadrature weights shared by every state of this model."""

    @property
    @abc.abstractmethod
    def admissible_bounds(self):
        """Component box ``(lo, hi)`` containing all admissible states."""

    # --- optional capabilities --------------------------------------------
    #: energy(., z) is C^1 in t for every fixed z, so time integrals of the
    #: rate reduce to energy differences.
    time_smooth = True

    def stability_oracle(self, t: float, z: State) -> StabilityVerdict:
        """Exact stability verdict when the model has one; default unknown."""
        return StabilityVerdict.unknown()

    def exact_incremental_minimize(self, t: float, z_prev: State) -> Optional[State]:
        """Closed-form global minimizer of ``I(t, .) + D(z_prev, .)`` if declared."""
        return None

    def coordinate_descent(self, t: float, start, z_prev: State,
                           tol: float, max_sweeps: int):
        """Model-specialized local descent ``start -> (values, objective)`` or None."""
        return None

    def energy_batch(self, t: float, values: np.ndarray) -> np.ndarray:
        """Energies of a batch of candidate component vectors (rows)."""
        w = self.weights
        return np.array([self.energy(t, State(v, w)) for v in values], dtype=np.float64)

    def dissipation_batch(self, z0: State, values: np.ndarray) -> np.ndarray:
        """Dissipation from ``z0`` to a batch of candidate vectors (rows)."""
        w = self.weights
        return np.array([self.dissipation(z0, State(v, w)) for v in values],
                        dtype=np.float64)

    def energy_time_integral(self, t0: float, t1: float, z: State) -> float:
        """Integral of ``energy_rate(., z)`` over ``[t0, t1]`` at frozen state.

        Exact (an energy difference) when the model is smooth in time,
        otherwise 5-point Gauss-Legendre.
        """
        if self.time_smooth:
            return self.energy(t1, z) - self.energy(t0, z)
        mid = 0.5 * (t0 + t1)
        half = 0.5 * (t1 - t0)
        return float(half * sum(
            wq * self.energy_rate(mid + half * xq, z)
            for xq, wq in zip(_GL5_NODES, _GL5_WEIGHTS)
        ))

    # --- conveniences -----------------------------------------------------
    def state(self, values) -> State:
        return State(values, self.weights)

    def validate_state(self, z: State) -> None:
        if len(z) != len(self.weights) or not np.array_equal(z.weights, self.weights):
            raise InadmissibleStateError(
                f"state weights do not match the {self.name} model"
            )
        if not self.is_admissible(z):
            raise InadmissibleStateError(
                f"state {z.values.tolist()} is not admissible for {self.name}"
            )

    def describe(self) -> dict:
        """Deterministic summary used by reports."""
        lo, hi = self.admissible_bounds
        return {
            "name": self.name,
            "n_components": int(len(self.weights)),
            "coercivity_const": float(self.coercivity_const),
            "lipschitz_bound": float(self.lipschitz_bound),
            "horizon": self.horizon,
            "bounds_lo": [float(x) for x in lo],
            "bounds_hi": [float(x) for x in hi],
        }


class EquilibriumModel(Model):
    """Model whose energy arises by eliminating an equilibrium field.

    The stored energy is ``I(t, z) = min_phi E(t, phi, z)`` where the inner
    minimization is a symmetric positive semi-definite linear solve.  The
    time rate follows the envelope rule: differentiate ``E`` in ``t`` at the
    frozen equilibrium field.
    """

    @abc.abstractmethod
    def reduced_energy(self, t: float, z: State):
        """Return ``(I(t, z), phi_star)`` via the inner equilibrium solve."""

    def equilibrium(self, t: float, z: State) -> np.ndarray:
        """Equilibrium field ``phi*(t, z)``."""
        return self.reduced_energy(t, z)[1]


class TimeReparametrizedModel(Model):
    """Time-remapped view ``I~(s, z) = I(alpha(s), z)`` of a base model.

    ``alpha`` must be strictly increasing with ``alpha(0) = 0``; solutions of
    the remapped problem at nodes ``s_k`` coincide with solutions of the base
    problem at nodes ``alpha(s_k)`` (rate independence).  ``alpha_rate`` is
    only needed for energy-rate evaluations.
    """

    def __init__(self, base: Model, alpha: Callable[[float], float],
                 horizon: float, alpha_rate: Optional[Callable[[float], float]] = None,
                 lipschitz_bound: Optional[float] = None):
        super().__init__(horizon)
        self.base = base
        self.alpha = alpha
        self.alpha_rate = alpha_rate
        self._lipschitz = lipschitz_bound
        self.name = f"{base.name}-reparametrized"
        self.time_smooth = base.time_smooth

    def energy(self, t, z):
        return self.base.energy(self.alpha(t), z)

    def energy_rate(self, t, z):
        if self.alpha_rate is None:
            raise NotImplementedError("alpha_rate required for energy_rate")
        return self.base.energy_rate(self.alpha(t), z) * self.alpha_rate(t)

    def dissipation(self, z0, z1):
        return self.base.dissipation(z0, z1)

    def is_admissible(self, z):
        return self.base.is_admissible(z)

    @property
    def lipschitz_bound(self):
        if self._lipschitz is None:
            raise NotImplementedError("pass lipschitz_bound to the wrapper")
        return self._lipschitz

    @property
    def coercivity_const(self):
        return self.base.coercivity_const

    @property
    def weights(self):
        return self.base.weights

    @property
    def admissible_bounds(self):
        return self.base.admissible_bounds

    def stability_oracle(self, t, z):
        return self.base.stability_oracle(self.alpha(t), z)

    def exact_incremental_minimize(self, t, z_prev):
        return self.base.exact_incremental_minimize(self.alpha(t), z_prev)

    def coordinate_descent(self, t, start, z_prev, tol, max_sweeps):
        return self.base.coordinate_descent(self.alpha(t), start, z_prev, tol, max_sweeps)

    def energy_batch(self, t, values):
        return self.base.energy_batch(self.alpha(t), values)

    def dissipation_batch(self, z0, values):
        return self.base.dissipation_batch(z0, values)


def total_dissipation(model: Model, traj: Trajectory, s: float, t: float) -> float:
    """Total dissipation of a piecewise-constant trajectory over ``[s, t]``.

    Computed as the node-to-node jump sum, which equals the supremum of
    dissipation sums over arbitrary partitions: by the triangle inequality a
    coarser chain never exceeds the full chain, and refining inside a
    constant piece only adds ``D(z, z) = 0`` terms.  ``s`` and ``t`` must be
    grid nodes with ``s < t``; an infinite jump makes the result ``+inf``.
    """
    i = traj.grid.node_index(s)
    j = traj.grid.node_index(t)
    if i >= j:
        raise ValueError("need s < t")
    out = 0.0
    for k in range(i, j):
        d = model.dissipation(traj.states[k], traj.states[k + 1])
        if math.isinf(d):
            return math.inf
        out += d
    return out

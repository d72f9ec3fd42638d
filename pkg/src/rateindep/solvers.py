"""Incremental global minimization for rate-independent evolutions.

Time stepping: given the state ``z_{k-1}``, the next state globally
minimizes ``I(t_k, .) + D(z_{k-1}, .)``.  Three strategies cover the model
structures shipped with the package:

* ``exact``: the model's declared closed-form incremental minimizer
  (componentwise play updates, scalar threshold reductions, vertex
  enumeration); global and exact.
* ``grid_search``: a full lattice over the admissible box followed by nested
  shrinking passes around the incumbent; global over the visited lattice.
* ``multistart``: seeded multistart local descent (projected coordinate
  descent with backtracking, or a model-specialized exact coordinate
  update); the best local minimum found.

Each step records its guarantee level, the best objective, and the
runner-up gap.  The previous state is always a candidate, so the accepted
objective never exceeds ``I(t_k, z_{k-1})``.  When several minimizers tie
(within 1e-12), the one with the least dissipation from ``z_{k-1}`` wins,
then the lexicographically smallest; candidate collection is separated from
selection so results do not depend on evaluation order.

The step loop is inherently sequential; all per-step work uses pure model
evaluations on immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .core import (EquilibriumModel, InadmissibleStateError, Model, State,
                   TimeGrid, Trajectory)

__all__ = [
    "SolverStrategy",
    "StepLog",
    "IncrementalSolution",
    "SolverStepFailureError",
    "solve_incremental",
    "solve_with_elimination",
]

_TIE_TOL = 1e-12
_LATTICE_LIMIT = 2_000_000


class SolverStepFailureError(RuntimeError):
    """A step's minimization failed; carries the step index and diagnostics."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class SolverStrategy:
    """Minimization strategy for the incremental problem.

    ``resolution``/``refinement_rounds`` configure grid search, ``starts``/
    ``max_iterations``/``tolerance`` configure multistart descent, and
    ``rng_seed`` makes multistart reproducible (the stream is derived from
    the seed and the step index only, never from time values).
    """

    variant: Literal["exact", "grid_search", "multistart"] = "exact"
    resolution: int = 9
    refinement_rounds: int = 3
    starts: int = 12
    max_iterations: int = 400
    tolerance: float = 1e-12
    rng_seed: int = 0
    descent: Literal["auto", "backtracking"] = "auto"

    def __post_init__(self):
        if self.variant not in ("exact", "grid_search", "multistart"):
            raise ValueError(f"unknown strategy variant {self.variant!r}")
        if self.resolution < 2:
            raise ValueError("grid search resolution must be >= 2 per component")
        if self.starts < 1:
            raise ValueError("multistart needs at least one start")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be >= 0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class StepLog:
    """Per-step solver diagnostics."""

    index: int
    time: float
    guarantee: str
    candidates: int
    starts_used: int
    best_objective: float
    runner_up_gap: Optional[float]
    possible_non_attainment: bool = False


@dataclass(frozen=True, eq=False)
class IncrementalSolution:
    """States and bookkeeping produced by the incremental solver.

    ``per_step_energy[k] = I(t_k, z_k)`` for every node and
    ``per_step_dissipation[k-1] = D(z_{k-1}, z_k)`` for every step; all are
    finite (an infinite optimum is a solver failure, not a result).
    """

    grid: TimeGrid
    states: tuple
    per_step_energy: np.ndarray
    per_step_dissipation: np.ndarray
    solver_log: tuple
    strategy: Optional[SolverStrategy] = None
    equilibria: Optional[tuple] = None

    def trajectory(self, continuity: str = "left") -> Trajectory:
        return Trajectory(self.grid, self.states, continuity)

    @property
    def guarantee_level(self) -> str:
        order = {"initial": 0, "exact-global": 0, "lattice-global": 1,
                 "local-multistart": 2, "loaded": 3}
        worst = "exact-global"
        for log in self.solver_log:
            if order.get(log.guarantee, 3) > order[worst]:
                worst = log.guarantee
        return worst

    @classmethod
    def from_states(cls, model: Model, grid: TimeGrid, states: Sequence[State]):
        """Rebuild the bookkeeping for externally supplied states (saved runs)."""
        states = tuple(states)
        if len(states) != len(grid):
            raise ValueError("need one state per grid node")
        for z in states:
            model.validate_state(z)
        energies = np.array([model.energy(t, z)
                             for t, z in zip(grid.times, states)])
        diss = np.array([model.dissipation(states[k - 1], states[k])
                         for k in range(1, len(states))])
        logs = tuple(StepLog(k, float(grid.times[k]), "loaded", 0, 0,
                             float(energies[k] + (diss[k - 1] if k else 0.0)), None)
                     for k in range(len(states)))
        return cls(grid, states, energies, diss, logs)


# --------------------------------------------------------------------------
# candidate selection

def _select(model: Model, z_prev: State, values: np.ndarray, objs: np.ndarray):
    """Deterministic argmin selection: objective, then dissipation, then
    lexicographic order; returns (chosen values, objective, runner-up gap)."""
    finite = np.isfinite(objs)
    if not np.any(finite):
        return None, math.inf, None
    values = values[finite]
    objs = objs[finite]
    best = float(np.min(objs))
    tol = _TIE_TOL * max(1.0, abs(best))
    tie = np.flatnonzero(objs <= best + tol)
    if len(tie) > 1:
        diss = model.dissipation_batch(z_prev, values[tie])
        dbest = float(np.min(diss))
        tie = tie[diss <= dbest + _TIE_TOL * max(1.0, abs(dbest))]
    if len(tie) > 1:
        order = np.lexsort(np.flipud(values[tie].T))
        chosen = tie[order[0]]
    else:
        chosen = tie[0]
    others = objs[objs > best + tol]
    gap = float(np.min(others) - best) if len(others) else None
    return values[chosen].copy(), float(objs[chosen]), gap


def _objective_batch(model: Model, t: float, z_prev: State, values: np.ndarray):
    return model.energy_batch(t, values) + model.dissipation_batch(z_prev, values)


# --------------------------------------------------------------------------
# strategies

def _exact_step(model: Model, t: float, z_prev: State, strategy: SolverStrategy,
                step: int):
    z = model.exact_incremental_minimize(t, z_prev)
    if z is None:
        raise SolverStepFailureError(
            step, f"model {model.name!r} declares no closed-form incremental "
                  f"minimizer; use grid_search or multistart")
    obj = model.energy(t, z) + model.dissipation(z_prev, z)
    log = StepLog(step, t, "exact-global", 1, 0, float(obj), None)
    return z.values.copy(), float(obj), log


def _lattice_axes(lo, hi, res, fixed, pin):
    axes = []
    for i in range(len(lo)):
        if fixed is not None and fixed[i]:
            axes.append(np.array([pin[i]]))
        else:
            axes.append(np.linspace(lo[i], hi[i], res))
    return axes


def _cartesian(axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _grid_search_step(model: Model, t: float, z_prev: State,
                      strategy: SolverStrategy, step: int):
    lo, hi = model.admissible_bounds
    p = len(lo)
    fixed = getattr(model, "fixed_components", None)
    free = p if fixed is None else int(np.sum(fixed == 0))
    if strategy.resolution ** free > _LATTICE_LIMIT:
        raise SolverStepFailureError(
            step, f"lattice of {strategy.resolution}^{free} points exceeds the "
                  f"search limit; use multistart")
    span_lo, span_hi = lo.copy(), hi.copy()
    pool_vals = [z_prev.values.reshape(1, -1)]
    pool_objs = [_objective_batch(model, t, z_prev, pool_vals[0])]
    n_cand = 1
    incumbent = None
    incumbent_obj = math.inf
    history = []
    for round_idx in range(1 + strategy.refinement_rounds):
        lattice = _cartesian(_lattice_axes(span_lo, span_hi,
                                           strategy.resolution, fixed,
                                           z_prev.values))
        objs = _objective_batch(model, t, z_prev, lattice)
        n_cand += len(lattice)
        best_idx = int(np.argmin(objs))
        best = float(objs[best_idx])
        tol = _TIE_TOL * max(1.0, abs(best))
        keep = objs <= best + tol
        pool_vals.append(lattice[keep])
        pool_objs.append(objs[keep])
        if best < incumbent_obj:
            incumbent_obj = best
            incumbent = lattice[best_idx]
        history.append(incumbent_obj)
        if incumbent is None:
            continue
        # shrink the window to one lattice cell around the incumbent
        half = (span_hi - span_lo) / (strategy.resolution - 1)
        span_lo = np.maximum(lo, incumbent - half)
        span_hi = np.minimum(hi, incumbent + half)
    values, obj, gap = _select(model, z_prev,
                               np.vstack(pool_vals), np.concatenate(pool_objs))
    if values is None:
        raise SolverStepFailureError(step, "every lattice candidate has "
                                           "infinite objective")
    # the search has not settled if the trailing refinement rounds were still
    # lowering the incumbent beyond the tolerance
    window = min(2, strategy.refinement_rounds)
    non_attainment = bool(
        window > 0 and math.isfinite(history[-1])
        and (not math.isfinite(history[-1 - window])
             or history[-1] < history[-1 - window] - strategy.tolerance))
    log = StepLog(step, t, "lattice-global", n_cand, 0, obj, gap,
                  possible_non_attainment=bool(non_attainment))
    return values, obj, log


def _backtracking_descent(objective, start, lo, hi, fixed, anchors, tol,
                          max_sweeps):
    """Projected coordinate descent with per-coordinate backtracking steps.

    Each coordinate visit first tries its anchor (the previous state's value,
    where the dissipation is kinked), then moves +-step with halving until an
    improvement is found; successful steps persist and grow.  Terminates when
    a full sweep decreases the objective by less than ``tol``.
    """
    z = np.array(start, dtype=np.float64, copy=True)
    obj = objective(z)
    span = hi - lo
    steps = span / 4.0
    floors = 1e-10 * span
    for _ in range(max_sweeps):
        sweep_start = obj
        for i in range(len(z)):
            if fixed is not None and fixed[i]:
                continue
            if anchors is not None and anchors[i] != z[i] \
                    and lo[i] <= anchors[i] <= hi[i]:
                trial = z.copy()
                trial[i] = anchors[i]
                v = objective(trial)
                if v < obj:
                    z, obj = trial, v
            step = steps[i]
            while step > floors[i]:
                moved = False
                for sgn in (1.0, -1.0):
                    cand = min(max(z[i] + sgn * step, lo[i]), hi[i])
                    if cand == z[i]:
                        continue
                    trial = z.copy()
                    trial[i] = cand
                    v = objective(trial)
                    if v < obj:
                        z, obj = trial, v
                        moved = True
                        break
                if moved:
                    steps[i] = min(step * 2.0, span[i] / 4.0)
                    break
                step *= 0.5
            else:
                steps[i] = max(step, floors[i])
        if sweep_start - obj < tol:
            break
    return z, obj


def _multistart_step(model: Model, t: float, z_prev: State,
                     strategy: SolverStrategy, step: int):
    lo, hi = model.admissible_bounds
    p = len(lo)
    fixed = getattr(model, "fixed_components", None)
    starts = [z_prev.values.copy()]
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        vals = lo + q * (hi - lo)
        if fixed is not None:
            vals = np.where(fixed.astype(bool), z_prev.values, vals)
        starts.append(vals)
    n_random = max(0, strategy.starts - len(starts))
    rng = np.random.default_rng([strategy.rng_seed, step])
    for _ in range(n_random):
        vals = lo + rng.random(p) * (hi - lo)
        if fixed is not None:
            vals = np.where(fixed.astype(bool), z_prev.values, vals)
        starts.append(vals)
    starts = starts[:max(strategy.starts, 1)]

    def objective(vals):
        row = vals.reshape(1, -1)
        return float(model.energy_batch(t, row)[0]
                     + model.dissipation_batch(z_prev, row)[0])

    results = []
    for s in starts:
        hook = None
        if strategy.descent == "auto":
            hook = model.coordinate_descent(t, s, z_prev, strategy.tolerance,
                                            strategy.max_iterations)
        if hook is None:
            vals, obj = _backtracking_descent(objective, s, lo, hi, fixed,
                                              z_prev.values,
                                              strategy.tolerance,
                                              strategy.max_iterations)
        else:
            vals, obj = hook
        results.append((np.asarray(vals, dtype=np.float64), float(obj)))
    cand_vals = np.vstack([v.reshape(1, -1) for v, _ in results]
                          + [z_prev.values.reshape(1, -1)])
    cand_objs = _objective_batch(model, t, z_prev, cand_vals)
    values, obj, gap = _select(model, z_prev, cand_vals, cand_objs)
    if values is None:
        raise SolverStepFailureError(step, "all descents ended at infinite "
                                           "objective")
    log = StepLog(step, t, "local-multistart", len(cand_vals), len(starts),
                  obj, gap)
    return values, obj, log


_STEPPERS = {
    "exact": _exact_step,
    "grid_search": _grid_search_step,
    "multistart": _multistart_step,
}


# --------------------------------------------------------------------------
# drivers

def solve_incremental(model: Model, grid: TimeGrid, z0: State,
                      strategy: SolverStrategy) -> IncrementalSolution:
    """Solve the incremental problem along the grid from the initial state.

    Preconditions: ``z0`` is admissible with finite initial energy, and the
    grid does not extend past the model's loading horizon.
    """
    model.validate_state(z0)
    if grid.T > model.horizon * (1 + 1e-12):
        raise ValueError(f"grid horizon {grid.T} exceeds the model horizon "
                         f"{model.horizon}")
    e0 = model.energy(0.0, z0)
    if not math.isfinite(e0):
        raise InadmissibleStateError("initial state has infinite energy")

    stepper = _STEPPERS[strategy.variant]
    states = [z0]
    energies = [float(e0)]
    diss = []
    logs = [StepLog(0, 0.0, "initial", 0, 0, float(e0), None)]
    for k in range(1, len(grid)):
        t = float(grid.times[k])
        z_prev = states[-1]
        values, obj, log = stepper(model, t, z_prev, strategy, k)
        if not math.isfinite(obj):
            raise SolverStepFailureError(k, "objective at the minimizer is "
                                            "not finite")
        z_new = model.state(values)
        if not model.is_admissible(z_new):
            raise SolverStepFailureError(k, "selected candidate is outside the "
                                            "admissible set")
        d = model.dissipation(z_prev, z_new)
        e = model.energy(t, z_new)
        if not (math.isfinite(d) and math.isfinite(e)):
            raise SolverStepFailureError(k, "accepted step has non-finite "
                                            "energy or dissipation")
        states.append(z_new)
        energies.append(float(e))
        diss.append(float(d))
        logs.append(log)
    return IncrementalSolution(grid, tuple(states), np.array(energies),
                               np.array(diss), tuple(logs), strategy=strategy)


def solve_with_elimination(model: EquilibriumModel, grid: TimeGrid, z0: State,
                           strategy: SolverStrategy) -> IncrementalSolution:
    """Incremental solve for models defined through an inner equilibrium field.

    Identical stepping on the reduced energy, but additionally records the
    equilibrium field at every accepted node.  The energy rate of such models
    follows the envelope rule (differentiate the full energy in time at the
    frozen equilibrium field).
    """
    if not isinstance(model, EquilibriumModel):
        raise TypeError("solve_with_elimination needs an EquilibriumModel")
    solution = solve_incremental(model, grid, z0, strategy)
    equilibria = tuple(model.equilibrium(float(t), z)
                       for t, z in zip(grid.times, solution.states))
    return IncrementalSolution(solution.grid, solution.states,
                               solution.per_step_energy,
                               solution.per_step_dissipation,
                               solution.solver_log, strategy=strategy,
                               equilibria=equilibria)

"""Certification of trajectories against the defining conditions.

A trajectory solves the evolution when it is globally stable at every time
(its energy never exceeds any competitor's energy plus the transition
dissipation) and satisfies the energy inequality between any two times.  For
incremental solutions this module checks, with explicit residuals and a sign
convention of "<= 0 means satisfied":

* per-node stability, by exact model oracle where one exists and by
  competitor sampling otherwise (evidence, not proof);
* the per-step energy chain: the time integral of the energy rate at the new
  state bounds the step energy balance from below, the integral at the old
  state from above;
* the summed two-sided energy estimate between arbitrary node pairs, with
  the left-continuous interpolant inside the lower integral and the
  right-continuous one in the upper;
* the a priori energy/dissipation bound and the weighted-l1 norm bound
  driven by the loading-rate constant and the coercivity constant.

Time integrals of the energy rate at a frozen state are exact energy
differences for time-smooth models (all shipped ones) and 5-point
Gauss-Legendre otherwise.  Checks over node pairs and competitor batches are
embarrassingly parallel over immutable inputs; records are merged in index
order, so reports are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .core import Model, State, TimeGrid, Trajectory, refine_dyadic, total_dissipation
from .solvers import (IncrementalSolution, SolverStrategy, SolverStepFailureError,
                      solve_incremental)

__all__ = [
    "StabilityCheck",
    "StabilityRecord",
    "EnergyResidual",
    "StepChainRecord",
    "TwoSidedRecord",
    "BoundRecord",
    "CertificateReport",
    "RefinementStudy",
    "LevelRecord",
    "sample_competitors",
    "check_stability",
    "check_energy_inequality",
    "check_two_sided",
    "energy_chain",
    "certify",
    "refinement_study",
]


@dataclass(frozen=True)
class StabilityCheck:
    """Configuration of the per-node stability test.

    ``auto`` uses the model's exact oracle when it returns a verdict and
    falls back to sampling.  Sampled competitors are the union of a lattice
    over the admissible box (resolution per active component, subsampled
    above ``lattice_cap`` points), seeded random admissible points, and
    coordinate perturbations of the tested state at several scales.
    """

    mode: Literal["auto", "oracle", "sampled"] = "auto"
    lattice_resolution: int = 17
    random_competitors: int = 512
    perturbation_scales: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    lattice_cap: int = 5000
    rng_seed: int = 0
    tolerance: float = 1e-9


@dataclass(frozen=True)
class StabilityRecord:
    node_index: int
    time: float
    status: Literal["certified", "sampled", "failed"]
    n_competitors: int
    worst_violation: Optional[float]
    witness: Optional[list]
    component: Optional[int]

    @property
    def passed(self) -> bool:
        return self.status != "failed"


@dataclass(frozen=True)
class EnergyResidual:
    """lhs - rhs of the energy inequality plus the balance gap |lhs - rhs|."""

    residual: float
    gap: float
    lhs: float
    rhs: float


@dataclass(frozen=True)
class StepChainRecord:
    """Per-step chain residuals (lower and upper), <= 0 when satisfied."""

    index: int
    lower_residual: float
    upper_residual: float


@dataclass(frozen=True)
class TwoSidedRecord:
    j: int
    m: int
    lower_residual: float
    upper_residual: float


@dataclass(frozen=True)
class BoundRecord:
    holds: bool
    min_slack: float


@dataclass(frozen=True)
class CertificateReport:
    """Self-contained certification record for one incremental run."""

    model: dict
    grid_times: list
    tolerance: float
    solver_guarantee: str
    stability: tuple
    energy_chain: tuple
    two_sided: tuple
    two_sided_worst: TwoSidedRecord
    dissipation_total: float
    energy_bound: BoundRecord
    norm_bound: BoundRecord

    @property
    def passed(self) -> bool:
        tol = self.tolerance
        if any(not r.passed for r in self.stability):
            return False
        if any(r.lower_residual > tol or r.upper_residual > tol
               for r in self.energy_chain):
            return False
        if (self.two_sided_worst.lower_residual > tol
                or self.two_sided_worst.upper_residual > tol):
            return False
        return self.energy_bound.holds and self.norm_bound.holds

    def to_dict(self) -> dict:
        def rec(x):
            if isinstance(x, (StabilityRecord, StepChainRecord, TwoSidedRecord,
                              BoundRecord)):
                return {k: rec(v) for k, v in vars(x).items()}
            if isinstance(x, (np.floating, float)):
                return float(x)
            if isinstance(x, (np.integer, int)):
                return int(x)
            if isinstance(x, (list, tuple)):
                return [rec(v) for v in x]
            return x

        return {
            "model": rec(self.model),
            "grid_times": [float(t) for t in self.grid_times],
            "tolerance": float(self.tolerance),
            "solver_guarantee": self.solver_guarantee,
            "passed": self.passed,
            "stability": [rec(r) for r in self.stability],
            "energy_chain": [rec(r) for r in self.energy_chain],
            "two_sided": [rec(r) for r in self.two_sided],
            "two_sided_worst": rec(self.two_sided_worst),
            "dissipation_total": float(self.dissipation_total),
            "energy_bound": rec(self.energy_bound),
            "norm_bound": rec(self.norm_bound),
        }


# --------------------------------------------------------------------------
# stability

def sample_competitors(model: Model, z: State, check: StabilityCheck,
                       node_index: int) -> np.ndarray:
    """Deterministic competitor batch for the sampled stability test."""
    lo, hi = model.admissible_bounds
    p = len(lo)
    fixed = getattr(model, "fixed_components", None)
    rng = np.random.default_rng([check.rng_seed, node_index])
    res = check.lattice_resolution
    axes = [np.linspace(lo[i], hi[i], res) for i in range(p)]
    if res ** p <= check.lattice_cap:
        mesh = np.meshgrid(*axes, indexing="ij")
        lattice = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        idx = rng.integers(0, res, size=(check.lattice_cap, p))
        lattice = np.stack([axes[i][idx[:, i]] for i in range(p)], axis=1)
    randoms = lo + rng.random((check.random_competitors, p)) * (hi - lo)
    perturbs = []
    span = hi - lo
    for scale in check.perturbation_scales:
        for i in range(p):
            for sgn in (1.0, -1.0):
                vals = z.values.copy()
                vals[i] = min(max(vals[i] + sgn * scale * span[i], lo[i]), hi[i])
                perturbs.append(vals)
    batch = np.vstack([lattice, randoms, np.array(perturbs)])
    if fixed is not None and np.any(fixed):
        batch[:, fixed.astype(bool)] = z.values[fixed.astype(bool)]
    return batch


def check_stability(model: Model, traj: Trajectory, t: float,
                    check: StabilityCheck = StabilityCheck()) -> StabilityRecord:
    """Stability of the trajectory state at a grid node.

    Oracle mode gives an exact verdict; sampled mode reports the worst
    violation ``I(t, z) - I(t, zhat) - D(z, zhat)`` over the competitor set
    (evidence, not proof).  An unknown oracle verdict falls back to sampling.
    """
    k = traj.grid.node_index(t)
    z = traj.states[k]
    if check.mode in ("auto", "oracle"):
        verdict = model.stability_oracle(t, z)
        if verdict.status == "stable":
            return StabilityRecord(k, t, "certified", 0, None, None, None)
        if verdict.status == "unstable":
            witness = (verdict.witness.values.tolist()
                       if verdict.witness is not None else None)
            return StabilityRecord(k, t, "failed", 0, verdict.margin, witness,
                                   verdict.component)
    batch = sample_competitors(model, z, check, k)
    violations = (model.energy(t, z) - model.energy_batch(t, batch)
                  - model.dissipation_batch(z, batch))
    worst_idx = int(np.argmax(violations))
    worst = float(violations[worst_idx])
    if worst > check.tolerance:
        bad = batch[worst_idx]
        comp = int(np.argmax(np.abs(bad - z.values)))
        return StabilityRecord(k, t, "failed", len(batch), worst,
                               bad.tolist(), comp)
    return StabilityRecord(k, t, "sampled", len(batch), worst, None, None)


# --------------------------------------------------------------------------
# energy inequality and chains

def _rate_integral(model: Model, t0: float, t1: float, z: State) -> float:
    return model.energy_time_integral(t0, t1, z)


def check_energy_inequality(model: Model, traj: Trajectory, t0: float,
                            t1: float) -> EnergyResidual:
    """Energy inequality between two grid nodes, using the trajectory's own
    interpolant inside the rate integral.

    Returns ``lhs - rhs`` with
    ``lhs = I(t1, z(t1)) + Diss(z, [t0, t1])`` and
    ``rhs = I(t0, z(t0)) + integral of the energy rate along z``; the
    reported gap ``|lhs - rhs|`` monitors how far the inequality is from an
    energy balance.
    """
    i = traj.grid.node_index(t0)
    j = traj.grid.node_index(t1)
    if i >= j:
        raise ValueError("need t0 < t1")
    times = traj.grid.times
    integral = 0.0
    for k in range(i, j):
        frozen = traj.states[k + 1] if traj.continuity == "left" else traj.states[k]
        integral += _rate_integral(model, float(times[k]), float(times[k + 1]),
                                   frozen)
    lhs = model.energy(t1, traj.states[j]) + total_dissipation(model, traj, t0, t1)
    rhs = model.energy(t0, traj.states[i]) + integral
    return EnergyResidual(lhs - rhs, abs(lhs - rhs), lhs, rhs)


def _chain_prefixes(model: Model, solution: IncrementalSolution):
    """Cumulative rate integrals (both interpolants), dissipation, energies."""
    times = solution.grid.times
    states = solution.states
    n = len(times)
    lower = np.zeros(n)
    upper = np.zeros(n)
    diss = np.zeros(n)
    for k in range(1, n):
        t0, t1 = float(times[k - 1]), float(times[k])
        lower[k] = lower[k - 1] + _rate_integral(model, t0, t1, states[k])
        upper[k] = upper[k - 1] + _rate_integral(model, t0, t1, states[k - 1])
        diss[k] = diss[k - 1] + solution.per_step_dissipation[k - 1]
    energies = solution.per_step_energy
    return lower, upper, diss, energies


def energy_chain(model: Model, solution: IncrementalSolution):
    """Per-step chain residuals: the step energy balance
    ``I(t_k, z_k) - I(t_{k-1}, z_{k-1}) + D(z_{k-1}, z_k)`` must lie between
    the rate integrals at the new and at the old state."""
    lower, upper, diss, energies = _chain_prefixes(model, solution)
    out = []
    for k in range(1, len(solution.grid)):
        balance = energies[k] - energies[k - 1] + solution.per_step_dissipation[k - 1]
        li = lower[k] - lower[k - 1]
        ui = upper[k] - upper[k - 1]
        out.append(StepChainRecord(k, li - balance, balance - ui))
    return tuple(out)


def check_two_sided(model: Model, solution: IncrementalSolution, j: int,
                    m: int) -> TwoSidedRecord:
    """Two-sided energy estimate between node indices ``j < m``."""
    if not 0 <= j < m <= solution.grid.n_steps:
        raise ValueError("need 0 <= j < m <= N")
    lower, upper, diss, energies = _chain_prefixes(model, solution)
    return _two_sided_from_prefixes(j, m, lower, upper, diss, energies)


def _two_sided_from_prefixes(j, m, lower, upper, diss, energies):
    mid = energies[m] + (diss[m] - diss[j])
    lo_side = energies[j] + (lower[m] - lower[j])
    hi_side = energies[j] + (upper[m] - upper[j])
    return TwoSidedRecord(j, m, float(lo_side - mid), float(mid - hi_side))


# --------------------------------------------------------------------------
# certification

def certify(model: Model, solution: IncrementalSolution, *,
            tolerance: float = 1e-9,
            stability_check: Optional[StabilityCheck] = None,
            include_pairs: bool = True) -> CertificateReport:
    """Full certificate: stability at every node, per-step chains, all
    two-sided node pairs, and the a priori bounds."""
    check = stability_check or StabilityCheck(tolerance=tolerance)
    traj = solution.trajectory("left")
    times = solution.grid.times
    stability = tuple(check_stability(model, traj, float(t), check)
                      for t in times)
    chain = energy_chain(model, solution)
    lower, upper, diss, energies = _chain_prefixes(model, solution)
    n = solution.grid.n_steps
    pairs = []
    worst = TwoSidedRecord(0, n, -math.inf, -math.inf)
    for j in range(n + 1):
        for m in range(j + 1, n + 1):
            rec = _two_sided_from_prefixes(j, m, lower, upper, diss, energies)
            if include_pairs:
                pairs.append(rec)
            if max(rec.lower_residual, rec.upper_residual) > \
               max(worst.lower_residual, worst.upper_residual):
                worst = rec

    budget = float(energies[0] + model.lipschitz_bound * solution.grid.T)
    slack_energy = min(budget - (energies[k] + diss[k]) for k in range(n + 1))
    energy_bound = BoundRecord(bool(slack_energy >= -tolerance), float(slack_energy))
    norm_budget = solution.states[0].weighted_l1_norm() + budget / model.coercivity_const
    slack_norm = min(norm_budget - solution.states[k].weighted_l1_norm()
                     for k in range(n + 1))
    norm_bound = BoundRecord(bool(slack_norm >= -tolerance), float(slack_norm))

    return CertificateReport(
        model=model.describe(),
        grid_times=[float(t) for t in times],
        tolerance=tolerance,
        solver_guarantee=solution.guarantee_level,
        stability=stability,
        energy_chain=chain,
        two_sided=tuple(pairs),
        two_sided_worst=worst,
        dissipation_total=float(diss[-1]),
        energy_bound=energy_bound,
        norm_bound=norm_bound,
    )


# --------------------------------------------------------------------------
# refinement study

@dataclass(frozen=True)
class LevelRecord:
    level: int
    n_steps: int
    fineness: float
    dissipation: float
    bv_lower: float
    bv_budget: float
    bv_holds: bool
    energy_gap: float


@dataclass(frozen=True, eq=False)
class RefinementStudy:
    """Solutions on a hierarchy of dyadically refined grids.

    ``pointwise_gaps[l]`` holds the weighted-l1 distances between levels
    ``l`` and ``l+1`` at the base grid's nodes.  ``failed_level`` marks a
    partial study (a level's solve failed; coarser levels are kept).
    """

    levels: tuple
    solutions: tuple
    pointwise_gaps: tuple
    failed_level: Optional[int] = None


def refinement_study(model: Model, base_grid: TimeGrid, z0: State,
                     strategy: SolverStrategy, levels: int) -> RefinementStudy:
    """Solve on ``levels`` hierarchical grids and report per-level diagnostics.

    At every level the dissipation must obey the a priori budget
    ``I(0, z0) + lipschitz_bound * T`` and dominate the coercivity-weighted
    path length (the discrete BV bound); the energy-balance gap over the full
    interval tracks convergence toward energy equality.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    grids = [base_grid]
    for _ in range(levels - 1):
        grids.append(refine_dyadic(grids[-1]))
    records = []
    solutions = []
    failed_level = None
    for lvl, grid in enumerate(grids):
        try:
            sol = solve_incremental(model, grid, z0, strategy)
        except SolverStepFailureError:
            failed_level = lvl
            break
        diss_total = float(np.sum(sol.per_step_dissipation))
        bv_lower = model.coercivity_const * sum(
            sol.states[k].weighted_l1_distance(sol.states[k + 1])
            for k in range(grid.n_steps))
        budget = float(sol.per_step_energy[0]
                       + model.lipschitz_bound * grid.T)
        gap = check_energy_inequality(model, sol.trajectory("right"),
                                      0.0, grid.T).gap
        records.append(LevelRecord(
            level=lvl, n_steps=grid.n_steps, fineness=grid.fineness,
            dissipation=diss_total, bv_lower=float(bv_lower),
            bv_budget=budget,
            bv_holds=bool(bv_lower <= diss_total + 1e-9
                          and diss_total <= budget + 1e-9),
            energy_gap=float(gap)))
        solutions.append(sol)
    gaps = []
    for lvl in range(len(solutions) - 1):
        coarse = solutions[lvl].trajectory("left")
        fine = solutions[lvl + 1].trajectory("left")
        gaps.append(np.array([
            coarse.evaluate(float(t)).weighted_l1_distance(fine.evaluate(float(t)))
            for t in base_grid.times]))
    return RefinementStudy(tuple(records), tuple(solutions), tuple(gaps),
                           failed_level)

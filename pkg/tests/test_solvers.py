import math

import numpy as np
import pytest

from rateindep import (ConvexPointwiseModel, DelaminationModel,
                       GradientNonconvexModel, InadmissibleStateError,
                       PlasticityPointModel, SolverStepFailureError,
                       SolverStrategy, TimeGrid, TimeReparametrizedModel,
                       TwoPhaseModel, solve_incremental, solve_with_elimination)
from rateindep.solvers import IncrementalSolution

from conftest import all_shipped_models, uniform_grid


class TestExactStrategy:
    def test_play_demo_sequence(self, play_demo_model, grid3, exact):
        sol = solve_incremental(play_demo_model, grid3,
                                play_demo_model.state([0.0]), exact)
        values = [s.values[0] for s in sol.states]
        assert values == [0.0, 0.5, 1.5]
        assert sol.guarantee_level == "exact-global"
        assert sol.per_step_dissipation.tolist() == [0.5, 1.0]

    def test_constant_load_is_stationary(self, exact):
        # z0 inside the stable set of a frozen loading stays put forever
        m = ConvexPointwiseModel(weights=[1.0], alpha=1.0, beta=2.0, c_d=1.0,
                                 load_offset=1.0, load_slope=0.0, horizon=2.0)
        z0 = m.state([0.5])
        assert m.stability_oracle(0.0, z0).status == "stable"
        sol = solve_incremental(m, uniform_grid(2.0, 8), z0, exact)
        for s in sol.states:
            assert s.values[0] == 0.5

    def test_plasticity_shear_jump(self, exact):
        # shear ramps 0 -> 2; update is the soft threshold s - kappa/mu
        m = PlasticityPointModel(shear_modulus=1.0, yield_stress=0.5,
                                 shear_slope=2.0, horizon=1.0)
        sol = solve_incremental(m, TimeGrid(np.array([0.0, 1.0])),
                                m.state([0.0]), exact)
        assert sol.states[1].values[0] == pytest.approx(1.5, abs=1e-14)
        # below the threshold nothing moves
        m2 = PlasticityPointModel(shear_modulus=1.0, yield_stress=0.5,
                                  shear_slope=0.4, horizon=1.0)
        sol2 = solve_incremental(m2, TimeGrid(np.array([0.0, 1.0])),
                                 m2.state([0.0]), exact)
        assert sol2.states[1].values[0] == 0.0

    def test_exact_requires_declared_minimizer(self, exact):
        m = GradientNonconvexModel(n_nodes=3, horizon=1.0)
        with pytest.raises(SolverStepFailureError, match="closed-form"):
            solve_incremental(m, uniform_grid(1.0, 2), m.state([0.0] * 3), exact)


class TestElimination:
    def test_zero_load_keeps_glue_and_zero_deformation(self, exact):
        m = DelaminationModel(segments=[1.0, 1.0], glue_kappa=[1.0],
                              load_offset=0.0, load_slope=0.0, horizon=2.0)
        sol = solve_with_elimination(m, uniform_grid(2.0, 4), m.state([1.0]),
                                     exact)
        for s in sol.states:
            assert s.values[0] == 1.0
        for phi in sol.equilibria:
            assert np.max(np.abs(phi)) == 0.0

    def test_single_interface_break_threshold(self, exact):
        # displacement ramp d(t) = t; glue breaks when the stored glue-chain
        # energy release d^2/6 first exceeds the breaking cost c_d
        c_d = 0.2
        m = DelaminationModel(segments=[1.0, 1.0], glue_kappa=[1.0], c_d=c_d,
                              load_offset=0.0, load_slope=1.0, horizon=2.0)
        grid = uniform_grid(2.0, 10)
        sol = solve_with_elimination(m, grid, m.state([1.0]), exact)

        # brute-force oracle: dense glue grid x assembled equilibrium solve
        zgrid = np.linspace(0.0, 1.0, 21)
        z_prev = 1.0
        brute_states = [1.0]
        for t in grid.times[1:]:
            best, best_z = math.inf, z_prev
            for zc in zgrid:
                if zc > z_prev:
                    continue
                e, _ = m.reduced_energy(float(t), m.state([zc]))
                obj = e + c_d * (z_prev - zc)
                if obj < best - 1e-12:
                    best, best_z = obj, zc
            brute_states.append(best_z)
            z_prev = best_z
        got = [s.values[0] for s in sol.states]
        assert got == pytest.approx(brute_states, abs=1e-12)
        # threshold time sqrt(6 c_d) ~ 1.095 -> glue holds at t=1.0, breaks at t=1.2
        assert got[5] == 1.0 and got[6] == 0.0

    def test_two_phase_elimination_equals_direct(self, exact):
        m = TwoPhaseModel(weights=[1.0, 0.5], modulus=2.0, transform_strain=0.8,
                          phase_offset=0.05, sigma_plus=0.5, sigma_minus=0.7,
                          load_slope=1.0, horizon=2.0)
        grid = uniform_grid(2.0, 6)
        z0 = m.state([0.0, 0.0])
        direct = solve_incremental(m, grid, z0, exact)
        eliminated = solve_with_elimination(m, grid, z0, exact)
        for a, b in zip(direct.states, eliminated.states):
            assert np.array_equal(a.values, b.values)
        assert eliminated.equilibria is not None
        for t, z, phi in zip(grid.times, eliminated.states,
                             eliminated.equilibria):
            val, phi2 = m.reduced_energy(float(t), z)
            assert np.allclose(phi, phi2, atol=1e-12)
            assert val == pytest.approx(m.energy(float(t), z), abs=1e-10)


class TestGridSearch:
    def test_matches_exact_play_solution(self, play_demo_model):
        m = play_demo_model
        grid = uniform_grid(2.0, 4)
        exact_sol = solve_incremental(m, grid, m.state([0.0]),
                                      SolverStrategy("exact"))
        gs_sol = solve_incremental(
            m, grid, m.state([0.0]),
            SolverStrategy("grid_search", resolution=17, refinement_rounds=12))
        # near-optimal ties (within 1e-12 in objective) resolve toward the
        # least dissipative candidate, so agreement is ~sqrt(tie tol)
        for a, b in zip(exact_sol.states, gs_sol.states):
            assert a.values[0] == pytest.approx(b.values[0], abs=5e-6)
        assert gs_sol.guarantee_level == "lattice-global"

    def test_matches_exact_on_two_phase(self):
        m = TwoPhaseModel(weights=[1.0, 1.0], modulus=4.0, transform_strain=0.6,
                          phase_offset=0.1, sigma_plus=0.7, sigma_minus=0.9,
                          load_slope=1.0, horizon=2.0)
        grid = uniform_grid(2.0, 5)
        z0 = m.state([0.0, 0.0])
        a = solve_incremental(m, grid, z0, SolverStrategy("exact"))
        b = solve_incremental(m, grid, z0,
                              SolverStrategy("grid_search", resolution=11,
                                             refinement_rounds=14))
        # the mass coordinate is what the energy sees
        for sa, sb in zip(a.states, b.states):
            assert m.mass(sa.values) == pytest.approx(m.mass(sb.values),
                                                      abs=1e-5)

    def test_lattice_limit_guard(self):
        m = GradientNonconvexModel(n_nodes=12, horizon=1.0)
        with pytest.raises(SolverStepFailureError, match="multistart"):
            solve_incremental(m, uniform_grid(1.0, 2), m.state([0.0] * 12),
                              SolverStrategy("grid_search", resolution=9))


class TestMultistart:
    def test_matches_exact_on_play_demo(self, play_demo_model):
        # exercises the generic backtracking descent (no model hook here)
        m = play_demo_model
        grid = uniform_grid(2.0, 4)
        a = solve_incremental(m, grid, m.state([0.0]), SolverStrategy("exact"))
        b = solve_incremental(m, grid, m.state([0.0]),
                              SolverStrategy("multistart", starts=8,
                                             rng_seed=3, max_iterations=300))
        # objective-decrease termination at 1e-12 leaves ~sqrt(tol) slack in z
        for sa, sb in zip(a.states, b.states):
            assert sa.values[0] == pytest.approx(sb.values[0], abs=5e-6)

    def test_double_well_solution_is_locally_unbeatable(self):
        m = GradientNonconvexModel(n_nodes=5, c_d=0.5, load_slope=1.0,
                                   horizon=2.0)
        grid = uniform_grid(2.0, 4)
        z0 = m.state(np.full(5, -1.0))
        sol = solve_incremental(m, grid, z0,
                                SolverStrategy("multistart", starts=10,
                                               rng_seed=0))
        rng = np.random.default_rng(1)
        lo, hi = m.admissible_bounds
        for k in range(1, len(grid)):
            t = float(grid.times[k])
            z = sol.states[k]
            prev = sol.states[k - 1]
            base = m.energy(t, z) + m.dissipation(prev, z)
            for _ in range(200):
                cand = np.clip(z.values + rng.normal(0, 0.05, 5), lo, hi)
                trial = m.state(cand)
                assert (m.energy(t, trial) + m.dissipation(prev, trial)
                        >= base - 1e-9)

    def test_hook_and_generic_descent_agree(self):
        m = GradientNonconvexModel(n_nodes=4, c_d=0.5, load_slope=1.0,
                                   horizon=2.0)
        grid = uniform_grid(2.0, 3)
        z0 = m.state(np.full(4, -1.0))
        a = solve_incremental(m, grid, z0,
                              SolverStrategy("multistart", starts=8, rng_seed=2))
        b = solve_incremental(m, grid, z0,
                              SolverStrategy("multistart", starts=8, rng_seed=2,
                                             descent="backtracking",
                                             max_iterations=600))
        for sa, sb in zip(a.states, b.states):
            assert np.allclose(sa.values, sb.values, atol=1e-5)

    def test_seed_reproducibility(self):
        m = GradientNonconvexModel(n_nodes=4, c_d=0.5, load_slope=1.0,
                                   horizon=2.0)
        grid = uniform_grid(2.0, 3)
        z0 = m.state(np.full(4, -1.0))
        runs = [solve_incremental(m, grid, z0,
                                  SolverStrategy("multistart", starts=8,
                                                 rng_seed=7))
                for _ in range(2)]
        for sa, sb in zip(runs[0].states, runs[1].states):
            assert np.array_equal(sa.values, sb.values)


@pytest.mark.parametrize("model", all_shipped_models(), ids=lambda m: m.name)
def test_objective_never_exceeds_staying_put(model):
    grid = uniform_grid(2.0, 6)
    lo, hi = model.admissible_bounds
    z0 = model.state(np.where(np.isfinite(lo), np.maximum(lo, 0.0), 0.0))
    if model.name == "delamination":
        z0 = model.state(np.ones(len(lo)))
    if model.name == "gradient_nonconvex":
        strategy = SolverStrategy("multistart", starts=8, rng_seed=0)
    else:
        strategy = SolverStrategy("exact")
    sol = solve_incremental(model, grid, z0, strategy)
    for k in range(1, len(grid)):
        t = float(grid.times[k])
        stay = model.energy(t, sol.states[k - 1])
        moved = (model.energy(t, sol.states[k])
                 + model.dissipation(sol.states[k - 1], sol.states[k]))
        assert moved <= stay + 1e-11


@pytest.mark.parametrize("model", all_shipped_models(), ids=lambda m: m.name)
def test_returned_states_pass_oracle_when_it_exists(model):
    grid = uniform_grid(2.0, 6)
    lo, hi = model.admissible_bounds
    z0 = model.state(np.where(np.isfinite(lo), np.maximum(lo, 0.0), 0.0))
    if model.name == "delamination":
        z0 = model.state(np.ones(len(lo)))
    if model.name == "gradient_nonconvex":
        return  # no oracle
    sol = solve_incremental(model, grid, z0, SolverStrategy("exact"))
    for t, z in zip(grid.times, sol.states):
        assert model.stability_oracle(float(t), z).status == "stable"


class TestRateIndependence:
    @pytest.mark.parametrize("name", ["convex_pointwise", "two_phase",
                                      "delamination", "plasticity_point",
                                      "gradient_nonconvex"])
    def test_time_remapping_preserves_states_bitwise(self, name):
        horizon = 4.0
        factories = {m.name: m for m in all_shipped_models(horizon=horizon)}
        base = factories[name]

        def alpha(s):
            return s * s

        # dyadic nodes on [0, 2] map to exact squares on [0, 4]
        s_nodes = np.linspace(0.0, 2.0, 9)
        mapped = TimeGrid(np.array([alpha(float(s)) for s in s_nodes]))
        dyadic = TimeGrid(s_nodes)
        wrapper = TimeReparametrizedModel(base, alpha, horizon=2.0)

        lo, hi = base.admissible_bounds
        z0_vals = np.where(np.isfinite(lo), np.maximum(lo, 0.0), 0.0)
        if name == "delamination":
            z0_vals = np.ones(len(lo))
        if name == "gradient_nonconvex":
            strategy = SolverStrategy("multistart", starts=8, rng_seed=5)
        else:
            strategy = SolverStrategy("exact")
        sol_base = solve_incremental(base, mapped, base.state(z0_vals), strategy)
        sol_wrap = solve_incremental(wrapper, dyadic, wrapper.state(z0_vals),
                                     strategy)
        for a, b in zip(sol_base.states, sol_wrap.states):
            assert np.array_equal(a.values, b.values)


class TestFailuresAndLogs:
    def test_inadmissible_initial_state(self, play_demo_model, grid3, exact):
        with pytest.raises(InadmissibleStateError):
            solve_incremental(play_demo_model, grid3,
                              play_demo_model.state([99.0]), exact)

    def test_grid_beyond_horizon_rejected(self, play_demo_model, exact):
        grid = uniform_grid(5.0, 4)
        with pytest.raises(ValueError, match="horizon"):
            solve_incremental(play_demo_model, grid,
                              play_demo_model.state([0.0]), exact)

    def test_step_logs_carry_diagnostics(self, play_demo_model, grid3):
        sol = solve_incremental(play_demo_model, grid3,
                                play_demo_model.state([0.0]),
                                SolverStrategy("grid_search", resolution=9,
                                               refinement_rounds=3))
        for log in sol.solver_log[1:]:
            assert log.guarantee == "lattice-global"
            assert log.candidates > 0
            assert math.isfinite(log.best_objective)

    def test_strategy_validation(self):
        with pytest.raises(ValueError):
            SolverStrategy("grid_search", resolution=1)
        with pytest.raises(ValueError):
            SolverStrategy("multistart", starts=0)
        with pytest.raises(ValueError):
            SolverStrategy("annealing")

    def test_non_attainment_flag_tracks_refinement_progress(self,
                                                            play_demo_model):
        # a coarse lattice still improving in its last shrink pass flags the
        # step; a huge tolerance silences the flag
        m = play_demo_model
        grid = TimeGrid(np.array([0.0, 1.0]))
        tight = solve_incremental(m, grid, m.state([0.0]),
                                  SolverStrategy("grid_search", resolution=5,
                                                 refinement_rounds=4,
                                                 tolerance=1e-12))
        assert tight.solver_log[1].possible_non_attainment
        loose = solve_incremental(m, grid, m.state([0.0]),
                                  SolverStrategy("grid_search", resolution=5,
                                                 refinement_rounds=4,
                                                 tolerance=1e6))
        assert not loose.solver_log[1].possible_non_attainment
        settled = solve_incremental(m, grid, m.state([0.0]),
                                    SolverStrategy("grid_search", resolution=17,
                                                   refinement_rounds=12))
        assert not settled.solver_log[1].possible_non_attainment

    def test_from_states_rebuilds_bookkeeping(self, play_demo_model, grid3,
                                              exact):
        m = play_demo_model
        sol = solve_incremental(m, grid3, m.state([0.0]), exact)
        rebuilt = IncrementalSolution.from_states(m, grid3, sol.states)
        assert np.array_equal(rebuilt.per_step_energy, sol.per_step_energy)
        assert np.array_equal(rebuilt.per_step_dissipation,
                              sol.per_step_dissipation)
        assert rebuilt.guarantee_level == "loaded"

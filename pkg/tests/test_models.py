import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rateindep import (ConvexPointwiseModel, DelaminationModel,
                       GradientNonconvexModel, PlasticityPointModel,
                       SingularSystemError, StabilityCheck, TimeGrid,
                       Trajectory, TwoPhaseModel, check_stability)
from oracles import line_search_min, nested_grid_min, second_differences


# ---------------------------------------------------------------------------
# convex pointwise (separable power-law)

class TestConvexPointwise:
    def test_energy_and_rate(self, play_demo_model):
        m = play_demo_model
        z = m.state([0.5])
        assert m.energy(1.0, z) == pytest.approx(0.25 - 2.0 * 0.5, abs=1e-15)
        assert m.energy_rate(1.0, z) == pytest.approx(-2.0 * 0.5, abs=1e-15)

    def test_exact_minimizer_against_line_search(self, play_demo_model):
        m = play_demo_model
        # argmin of z^2 - 2z + |z| and of z^2 - 4z + |z - 0.5|
        z1 = m.exact_incremental_minimize(1.0, m.state([0.0]))
        brute1 = line_search_min(lambda z: z * z - 2 * z + np.abs(z), -2, 3)
        assert z1.values[0] == pytest.approx(0.5, abs=1e-12)
        assert z1.values[0] == pytest.approx(brute1, abs=2e-6)
        z2 = m.exact_incremental_minimize(2.0, z1)
        brute2 = line_search_min(lambda z: z * z - 4 * z + np.abs(z - 0.5), -2, 3)
        assert z2.values[0] == pytest.approx(1.5, abs=1e-12)
        assert z2.values[0] == pytest.approx(brute2, abs=2e-6)

    @pytest.mark.parametrize("beta", [1.5, 2.0, 3.0])
    def test_exact_minimizer_general_beta(self, beta):
        m = ConvexPointwiseModel(weights=[1.0], alpha=0.7, beta=beta, c_d=0.4,
                                 load_offset=1.3, load_slope=0.0, horizon=1.0)
        prev = 0.2
        got = m.exact_incremental_minimize(0.5, m.state([prev])).values[0]
        brute = line_search_min(
            lambda z: 0.7 * np.abs(z) ** beta - 1.3 * z + 0.4 * np.abs(z - prev),
            -3, 3)
        assert got == pytest.approx(brute, abs=2e-6)

    def test_oracle_certifies_demo_points(self, play_demo_model):
        m = play_demo_model
        # at t=1 the driving map value 2z must lie in [g - c, g + c] = [1, 3]
        assert m.stability_oracle(1.0, m.state([0.5])).status == "stable"
        verdict = m.stability_oracle(1.0, m.state([0.0]))
        assert verdict.status == "unstable"
        assert verdict.component == 0
        assert verdict.margin > 0

    def test_oracle_interval_endpoints_inclusive(self, play_demo_model):
        m = play_demo_model
        assert m.stability_oracle(1.0, m.state([1.5])).status == "stable"
        assert m.stability_oracle(1.0, m.state([1.5 + 1e-6])).status == "unstable"

    def test_global_minimizer_is_stable(self, play_demo_model_normalized):
        m = play_demo_model_normalized
        t = 1.3
        zmin = line_search_min(lambda z: np.abs(z) ** 2 - 2 * t * z, -5, 5)
        assert m.stability_oracle(t, m.state([zmin])).status == "stable"

    def test_oracle_consistent_with_sampling(self):
        m = ConvexPointwiseModel(weights=[1.0, 0.5], alpha=[1.0, 2.0], beta=2.0,
                                 c_d=0.8, load_slope=[2.0, -1.0],
                                 bounds=(-3.0, 3.0), horizon=2.0)
        grid = TimeGrid(np.array([0.0, 2.0]))
        rng = np.random.default_rng(21)
        check = StabilityCheck(mode="sampled", rng_seed=5)
        lo, hi = m.admissible_bounds
        for trial in range(1000):
            t = float(rng.choice([0.0, 2.0]))
            vals = lo + rng.random(2) * (hi - lo)
            z = m.state(vals)
            traj = Trajectory(grid, [z, z])
            verdict = m.stability_oracle(t, z)
            sampled = check_stability(m, traj, t, check)
            if verdict.status == "stable":
                # no certified-stable point has a sampled violation
                assert sampled.worst_violation <= 1e-9
            else:
                # every certified-unstable point has a sampled witness, and
                # the oracle's own witness is a genuine improvement
                assert sampled.status == "failed"
                w = verdict.witness
                assert (m.energy(t, z) - m.energy(t, w)
                        - m.dissipation(z, w)) > 0

    def test_auto_gamma_normalizes(self):
        m = ConvexPointwiseModel(weights=[1.0], alpha=1.0, beta=2.0, c_d=1.0,
                                 load_slope=2.0, gamma="auto", horizon=2.0)
        # min over box x time of z^2 - 2 t z is at t=2, z=2 -> -4
        assert m.gamma == pytest.approx(4.0, abs=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            ConvexPointwiseModel(weights=[1.0], beta=1.0, horizon=1.0)
        with pytest.raises(ValueError):
            ConvexPointwiseModel(weights=[1.0], alpha=0.0, horizon=1.0)
        with pytest.raises(ValueError):
            ConvexPointwiseModel(weights=[-1.0], horizon=1.0)

    @given(alpha=st.floats(0.2, 3.0), beta=st.floats(1.2, 4.0),
           c_d=st.floats(0.1, 2.0), g=st.floats(-4.0, 4.0),
           prev=st.floats(-4.0, 4.0))
    @settings(max_examples=150, deadline=None)
    def test_play_update_lands_in_stable_set(self, alpha, beta, c_d, g, prev):
        m = ConvexPointwiseModel(weights=[1.0], alpha=alpha, beta=beta,
                                 c_d=c_d, load_offset=g, load_slope=0.0,
                                 bounds=(-8.0, 8.0), horizon=1.0)
        z = m.exact_incremental_minimize(0.5, m.state([prev]))
        assert m.stability_oracle(0.5, z).status == "stable"
        # and it never loses to staying put
        stay = m.energy(0.5, m.state([prev]))
        moved = m.energy(0.5, z) + m.dissipation(m.state([prev]), z)
        assert moved <= stay + 1e-12


# ---------------------------------------------------------------------------
# two-phase bar

class TestTwoPhase:
    def test_single_cell_reduced_formula(self):
        # one cell of unit length, prescribed end displacement d:
        # I = E (d - theta*eps_T)^2 / 2 + theta * w
        E, eps, w_chem, d = 2.0, 0.4, 0.3, 0.7
        m = TwoPhaseModel(weights=[1.0], modulus=E, transform_strain=eps,
                          phase_offset=w_chem, load_offset=d, load_slope=0.0,
                          gamma=0.0, horizon=1.0)
        for theta in (0.0, 0.3, 1.0):
            want = 0.5 * E * (d - theta * eps) ** 2 + theta * w_chem
            assert m.energy(0.5, m.state([theta])) == pytest.approx(want, abs=1e-14)

    def test_elimination_matches_closed_form(self):
        m = TwoPhaseModel(weights=[1.0, 0.5, 2.0], modulus=3.0,
                          transform_strain=0.5, phase_offset=0.2,
                          load_offset=0.4, load_slope=0.7, horizon=2.0)
        rng = np.random.default_rng(4)
        for _ in range(50):
            theta = m.state(rng.random(3))
            t = float(rng.uniform(0, 2))
            direct = m.energy(t, theta)
            eliminated, phi = m.reduced_energy(t, theta)
            assert eliminated == pytest.approx(direct, abs=1e-10)
            # the recorded chain displacement ends at the prescribed value
            assert phi[-1] == pytest.approx(m.load_at(t), abs=1e-10)

    def test_elimination_matches_brute_force_strains(self):
        E, eps, w_chem, d = 2.0, 0.5, 0.1, 0.8
        m = TwoPhaseModel(weights=[1.0, 0.5], modulus=E, transform_strain=eps,
                          phase_offset=w_chem, load_offset=d, load_slope=0.0,
                          gamma=0.0, horizon=1.0)
        theta = m.state([0.7, 0.2])

        def energies(e1_batch):
            # constraint: 1*e1 + 0.5*e2 = d
            e2 = (d - e1_batch[:, 0]) / 0.5
            val = 1.0 * (0.5 * E * (e1_batch[:, 0] - eps * 0.7) ** 2 + w_chem * 0.7)
            val += 0.5 * (0.5 * E * (e2 - eps * 0.2) ** 2 + w_chem * 0.2)
            return val

        _, brute = nested_grid_min(energies, [-3.0], [3.0], res=31, rounds=10)
        assert m.energy(0.0, theta) == pytest.approx(brute, rel=1e-9)

    def test_reduced_energy_is_quadratic_in_theta(self):
        m = TwoPhaseModel(weights=[1.0, 0.5, 0.25], modulus=2.0,
                          transform_strain=0.8, phase_offset=0.05,
                          load_offset=0.3, load_slope=0.5, horizon=2.0)
        rng = np.random.default_rng(8)
        base = rng.random(3) * 0.2
        direction = rng.random(3)
        direction /= np.max(direction) * 2
        taus = np.linspace(0.0, 1.0, 21)
        vals = np.array([m.energy(1.0, m.state(base + tau * direction))
                         for tau in taus])
        d2 = second_differences(vals)
        assert np.max(np.abs(d2 - d2[0])) < 1e-10

    def test_threshold_coercivity(self):
        m = TwoPhaseModel(weights=[1.0], sigma_plus=2.0, sigma_minus=0.5,
                          horizon=1.0)
        assert m.coercivity_const == 0.5
        rng = np.random.default_rng(13)
        for _ in range(100):
            a, b = m.state(rng.random(1)), m.state(rng.random(1))
            assert m.dissipation(a, b) >= 0.5 * a.weighted_l1_distance(b) - 1e-15

    def test_exact_mass_solve_matches_dense_search(self):
        m = TwoPhaseModel(weights=[1.0, 1.0], modulus=4.0, transform_strain=0.6,
                          phase_offset=0.1, sigma_plus=0.7, sigma_minus=0.9,
                          load_offset=0.0, load_slope=1.0, horizon=2.0)
        prev = m.state([0.2, 0.5])
        t = 1.7

        def objective(batch):
            return (m.energy_batch(t, batch)
                    + m.dissipation_batch(prev, batch))

        got = m.exact_incremental_minimize(t, prev)
        got_obj = float(objective(got.values.reshape(1, -1))[0])
        _, brute = nested_grid_min(objective, [0.0, 0.0], [1.0, 1.0],
                                   res=41, rounds=8)
        assert got_obj <= brute + 1e-9

    def test_oracle_consistent_with_sampling(self):
        m = TwoPhaseModel(weights=[1.0, 0.5], modulus=2.0, transform_strain=0.7,
                          phase_offset=0.1, sigma_plus=0.6, sigma_minus=0.8,
                          load_slope=1.0, horizon=2.0)
        grid = TimeGrid(np.array([0.0, 0.7, 1.3, 2.0]))
        rng = np.random.default_rng(33)
        check = StabilityCheck(mode="sampled", rng_seed=7)
        for _ in range(300):
            t = float(rng.choice(grid.times))
            z = m.state(rng.random(2))
            traj = Trajectory(grid, [z] * 4)
            verdict = m.stability_oracle(t, z)
            sampled = check_stability(m, traj, t, check)
            if verdict.status == "stable":
                assert sampled.worst_violation <= 1e-9
            else:
                w = verdict.witness
                assert (m.energy(t, z) - m.energy(t, w)
                        - m.dissipation(z, w)) > 0


# ---------------------------------------------------------------------------
# delamination chain

class TestDelamination:
    def test_two_spring_compliance_closed_form(self):
        # two unit springs joined by unit glue at z=1 under an end force f:
        # compliance 1 + 1 + 1 = 3, so I = -3 f^2 / 2 + offset
        m = DelaminationModel(segments=[1.0, 1.0], glue_kappa=[1.0],
                              control="force", load_offset=0.6, load_slope=0.0,
                              glue_floor=0.05, horizon=1.0)
        z = m.state([1.0])
        f = 0.6
        assert m.energy(0.0, z) - m.gamma == pytest.approx(-1.5 * f * f, abs=1e-12)

    def test_force_control_matches_brute_force_over_deformations(self):
        m = DelaminationModel(segments=[1.0, 1.0], glue_kappa=[1.0],
                              control="force", load_offset=0.6, load_slope=0.0,
                              glue_floor=0.05, horizon=1.0)
        z = m.state([0.8])

        def batch(phis):
            out = np.empty(len(phis))
            for i, row in enumerate(phis):
                full = np.concatenate(([0.0], row))
                out[i] = m.total_energy(0.0, full, z)
            return out

        _, brute = nested_grid_min(batch, [-3.0] * 3, [3.0] * 3, res=15, rounds=10)
        direct, phi = m.reduced_energy(0.0, z)
        assert direct == pytest.approx(brute, rel=1e-6, abs=1e-9)
        assert m.energy(0.0, z) == pytest.approx(direct, abs=1e-11)

    def test_displacement_reduced_energy_matches_assembled_solve(self):
        m = DelaminationModel(segments=[1.0, 2.0, 0.5], glue_kappa=[1.0, 3.0],
                              glue_area=[1.0, 0.5], load_offset=0.3,
                              load_slope=0.4, horizon=2.0)
        rng = np.random.default_rng(3)
        for _ in range(40):
            z = m.state(rng.random(2))
            t = float(rng.uniform(0, 2))
            closed = m.energy(t, z)
            solved, phi = m.reduced_energy(t, z)
            assert solved == pytest.approx(closed, abs=1e-11)
            assert phi[0] == 0.0
            assert phi[-1] == pytest.approx(m.load_at(t), abs=1e-12)

    def test_full_energy_affine_in_glue_at_fixed_deformation(self):
        m = DelaminationModel(segments=[1.0, 2.0], glue_kappa=[1.5],
                              load_offset=0.5, load_slope=0.0, horizon=1.0)
        rng = np.random.default_rng(6)
        phi = np.concatenate(([0.0], rng.uniform(-1, 1, 2), [0.5]))
        zs = np.linspace(0.0, 1.0, 9)
        vals = np.array([m.total_energy(0.0, phi, m.state([z])) for z in zs])
        assert np.max(np.abs(second_differences(vals))) < 1e-12

    def test_healing_is_infeasible(self):
        m = DelaminationModel(segments=[1.0, 1.0], horizon=1.0)
        assert m.dissipation(m.state([0.5]), m.state([0.6])) == math.inf
        assert m.dissipation(m.state([0.5]), m.state([0.5])) == 0.0
        d = m.dissipation(m.state([0.8]), m.state([0.3]))
        assert d == pytest.approx(m.c_d * (0.8 - 0.3), abs=1e-15)

    def test_force_control_requires_floor(self):
        with pytest.raises(ValueError):
            DelaminationModel(segments=[1.0, 1.0], control="force",
                              glue_floor=0.0, horizon=1.0)

    def test_singular_mode_named_under_inconsistent_load(self):
        m = DelaminationModel(segments=[1.0, 1.0], control="force",
                              load_offset=1.0, load_slope=0.0,
                              glue_floor=0.05, horizon=1.0)
        # fully broken glue detaches the loaded end segment
        broken = m.state([0.05]).with_values([0.0])
        with pytest.raises(SingularSystemError, match="detached"):
            m.reduced_energy(0.0, broken)
        with pytest.raises(SingularSystemError, match="detaches"):
            m.energy_batch(0.0, np.array([[0.0]]))

    def test_vertex_oracle_consistent_with_sampling(self):
        m = DelaminationModel(segments=[1.0, 0.5, 2.0], glue_kappa=[1.0, 2.0],
                              c_d=0.4, load_offset=0.2, load_slope=0.9,
                              horizon=2.0)
        grid = TimeGrid(np.array([0.0, 0.7, 1.3, 2.0]))
        check = StabilityCheck(mode="sampled", rng_seed=9)
        rng = np.random.default_rng(17)
        for _ in range(200):
            t = float(rng.choice(grid.times))
            z = m.state(rng.random(2))
            traj = Trajectory(grid, [z] * 4)
            verdict = m.stability_oracle(t, z)
            sampled = check_stability(m, traj, t, check)
            if verdict.status == "stable":
                assert sampled.worst_violation <= 1e-9
            else:
                w = verdict.witness
                assert (m.energy(t, z) - m.energy(t, w)
                        - m.dissipation(z, w)) > 0


# ---------------------------------------------------------------------------
# single-slip plasticity at a point

class TestPlasticityPoint:
    def test_no_driving_stress_keeps_slip(self):
        m = PlasticityPointModel(shear_modulus=1.0, yield_stress=0.5, horizon=1.0)
        psi, gamma = m.reduced_constitutive(0.7, m.plastic_transform(0.7))
        assert psi == 0.0
        assert gamma == 0.7

    def test_plastic_update_example(self):
        m = PlasticityPointModel(shear_modulus=1.0, yield_stress=0.5, horizon=1.0)
        F = np.array([[1.0, 2.0], [0.0, 1.0]])
        psi, gamma = m.reduced_constitutive(0.0, F)
        assert gamma == pytest.approx(1.5, abs=1e-14)
        assert psi == pytest.approx(0.875, abs=1e-14)
        brute = line_search_min(
            lambda g: 0.5 * (2.0 - g) ** 2 + 0.5 * np.abs(g), -1, 3)
        assert gamma == pytest.approx(brute, abs=2e-6)

    def test_elastic_regime(self):
        m = PlasticityPointModel(shear_modulus=2.0, yield_stress=1.0, horizon=1.0)
        # |s - gamma_old| <= kappa/mu = 0.5 keeps the slip frozen
        psi, gamma = m.reduced_constitutive(0.3, m.plastic_transform(0.75))
        assert gamma == 0.3
        assert psi == pytest.approx(0.5 * 2.0 * 0.45 ** 2, abs=1e-14)
        brute = line_search_min(
            lambda g: 0.5 * 2.0 * (0.75 - g) ** 2 + 1.0 * np.abs(g - 0.3), -2, 2)
        assert gamma == pytest.approx(brute, abs=2e-6)

    @pytest.mark.parametrize("gamma", [-3.0, 0.0, 0.5, 7.0])
    def test_unit_determinant_exact(self, gamma):
        m = PlasticityPointModel(horizon=1.0)
        P = m.plastic_transform(gamma)
        assert np.linalg.det(P) == 1.0

    def test_left_invariance_identity(self):
        m = PlasticityPointModel(yield_stress=0.5, horizon=1.0)
        assert m.left_invariance_check(np.eye(2), 0.3, 1.1) == 0.0

    def test_left_invariance_diagonal_stretch(self):
        m = PlasticityPointModel(yield_stress=0.5, horizon=1.0)
        Q = np.diag([2.0, 0.5])
        assert m.left_invariance_check(Q, 0.0, 1.0) <= 1e-12

    def test_left_invariance_subgroup_translation(self):
        # dyadic slips so the shear-subgroup cancellation is float-exact
        m = PlasticityPointModel(yield_stress=0.5, horizon=1.0)
        Q = m.plastic_transform(5.0)
        assert m.left_invariance_check(Q, -0.5, 2.25) == 0.0
        assert m.left_invariance_check(Q, -0.4, 2.2) <= 1e-14

    def test_rejects_non_unimodular_prior(self):
        m = PlasticityPointModel(horizon=1.0)
        with pytest.raises(ValueError):
            m.left_invariance_check(np.diag([2.0, 1.0]), 0.0, 1.0)

    def test_rejects_non_shear_path(self):
        m = PlasticityPointModel(horizon=1.0)
        with pytest.raises(ValueError):
            m.reduced_constitutive(0.0, np.array([[1.1, 0.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# gradient nonconvex (double well)

class TestGradientNonconvex:
    def test_energy_formula(self):
        m = GradientNonconvexModel(n_nodes=3, length=1.0, c_d=0.5,
                                   load_slope=0.0, gamma=0.0, horizon=1.0)
        z = m.state([0.0, 0.5, 1.0])
        h = 0.5
        want = (0.25 + 0.25) / (2 * h) + h * ((1.0) + (0.75 ** 2) + 0.0)
        assert m.energy(0.0, z) == pytest.approx(want, abs=1e-14)

    def test_auto_gamma_keeps_energy_nonnegative(self):
        m = GradientNonconvexModel(n_nodes=4, c_d=0.5, load_slope=1.5,
                                   gamma="auto", horizon=2.0)
        rng = np.random.default_rng(2)
        lo, hi = m.admissible_bounds
        for _ in range(200):
            z = m.state(lo + rng.random(4) * (hi - lo))
            for t in (0.0, 1.0, 2.0):
                assert m.energy(t, z) >= -1e-12

    def test_dirichlet_pins_boundary(self):
        m = GradientNonconvexModel(n_nodes=4, dirichlet=[-1.0, 1.0], horizon=1.0)
        assert m.is_admissible(m.state([-1.0, 0.0, 0.0, 1.0]))
        assert not m.is_admissible(m.state([-0.5, 0.0, 0.0, 1.0]))
        vals, obj = m.coordinate_descent(0.5, np.array([-1.0, 0.2, -0.2, 1.0]),
                                         m.state([-1.0, 0.0, 0.0, 1.0]),
                                         1e-12, 100)
        assert vals[0] == -1.0 and vals[-1] == 1.0

    def test_descent_objective_matches_model(self):
        m = GradientNonconvexModel(n_nodes=5, c_d=0.5, load_slope=1.0,
                                   horizon=2.0)
        prev = m.state(np.full(5, -1.0))
        vals, obj = m.coordinate_descent(1.0, prev.values, prev, 1e-12, 200)
        z = m.state(vals)
        assert obj == pytest.approx(m.energy(1.0, z) + m.dissipation(prev, z),
                                    rel=1e-12, abs=1e-12)

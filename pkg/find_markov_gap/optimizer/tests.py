import os
import tempfile
import unittest
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from find_markov_gap.band_models import LayerSpec, ModelSpec, covariance_real_space, tr_operator
from find_markov_gap.gaussian import ModeMask, markov_gap
from find_markov_gap.geometry import Lattice, build_tripartition, smoother_support
from find_markov_gap.optimizer import (
    Generator,
    NoiseSchedule,
    OptimizerConfig,
    apply_unitary,
    combine,
    exp_generator,
    generator_from_unitary,
    gradient_generator,
    line_search,
    load_generators,
    optimize,
    project_tr,
    random_generator,
    save_generators,
    search_step,
)
from find_markov_gap.utils.errors import ConfigError, GeometryError

LONG_TESTS = bool(os.getenv("MARKOV_GAP_LONG_TESTS"))
FULL_SIZE_TESTS = os.getenv("MARKOV_GAP_LONG_TESTS") == "full"
DELTA = 1e-5


def random_mixed_covariance(n_modes: int, seed: int, environment: int = 6) -> np.ndarray:
    total = n_modes + environment
    psi = unitary_group.rvs(total, random_state=np.random.default_rng(seed))[:, : total // 2]
    return (psi @ psi.conj().T)[:n_modes, :n_modes]


def mask(*indices: int) -> ModeMask:
    return ModeMask(tuple(indices))


class GradientTests(SimpleTestCase):
    A, B, S = mask(0, 1, 2), mask(3, 4, 5), mask(2, 3, 6, 7)

    def directional_derivative(self, C, Y: Generator) -> float:
        up = markov_gap(apply_unitary(C, Y, DELTA), self.A, self.B)
        down = markov_gap(apply_unitary(C, Y, -DELTA), self.A, self.B)
        return (up - down) / (2 * DELTA)

    def test_finite_differences_match_the_analytic_derivative(self):
        rng = np.random.default_rng(2024)
        for seed in range(20):
            C = random_mixed_covariance(8, seed)
            X = gradient_generator(C, self.A, self.B, self.S)
            Y = random_generator(self.S, rng)
            analytic = -float(np.real(np.trace(Y.X @ X.X)))
            numeric = self.directional_derivative(C, Y)
            self.assertLess(abs(numeric - analytic), 1e-3 * max(abs(analytic), 1e-3), msg=f"seed {seed}")

    def test_descent_direction_decreases_at_rate_norm_squared(self):
        C = random_mixed_covariance(8, seed=99)
        X = gradient_generator(C, self.A, self.B, self.S)
        numeric = self.directional_derivative(C, X)
        assert_allclose(numeric, -X.norm**2, rtol=1e-3)

    def test_empty_support_has_zero_gradient(self):
        C = random_mixed_covariance(6, seed=4)
        X = gradient_generator(C, mask(0, 1), mask(2, 3), ModeMask())
        self.assertEqual(X.norm, 0.0)

    def test_generator_is_hermitian(self):
        C = random_mixed_covariance(8, seed=5)
        X = gradient_generator(C, self.A, self.B, self.S).X
        assert_allclose(X, X.conj().T, atol=1e-12)


class GeneratorTests(SimpleTestCase):
    def test_unitary_round_trip_through_schur(self):
        rng = np.random.default_rng(1)
        u = unitary_group.rvs(5, random_state=rng)
        X = generator_from_unitary(u, ModeMask.full(5))
        assert_allclose(exp_generator(X, 1.0), u, atol=1e-10)

    def test_rotation_keeps_the_spectrum(self):
        C = random_mixed_covariance(6, seed=8)
        X = random_generator(mask(1, 2, 4), np.random.default_rng(3))
        rotated = apply_unitary(C, X, 0.7).entries
        assert_allclose(np.linalg.eigvalsh(rotated), np.linalg.eigvalsh(C), atol=1e-12)

    def test_combine_rejects_overlapping_supports(self):
        rng = np.random.default_rng(0)
        with self.assertRaises(GeometryError):
            combine([random_generator(mask(0, 1), rng), random_generator(mask(1, 2), rng)])

    def test_combine_places_blocks(self):
        rng = np.random.default_rng(0)
        a, b = random_generator(mask(0, 3), rng), random_generator(mask(1), rng)
        X = combine([a, b])
        self.assertEqual(X.support.indices, (0, 1, 3))
        assert_allclose(X.X[np.ix_([0, 2], [0, 2])], a.X)
        assert_allclose(X.X[1, 1], b.X[0, 0])

    def test_time_reversal_projection_is_idempotent(self):
        lat = Lattice(2, 1, layers=2)
        S = tr_operator(lat)
        X = random_generator(ModeMask.full(4), np.random.default_rng(6))
        once = project_tr(X, S)
        assert_allclose(project_tr(once, S).X, once.X, atol=1e-14)
        u = exp_generator(once, 0.8)
        assert_allclose(S @ u.conj() @ S.conj().T, u, atol=1e-12)

    def test_projection_needs_a_closed_support(self):
        S = tr_operator(Lattice(2, 1, layers=2), mask(0, 1, 2))
        with self.assertRaises(GeometryError):
            project_tr(random_generator(mask(0, 1, 2), np.random.default_rng(0)), S)

    def test_generators_survive_npz(self):
        rng = np.random.default_rng(2)
        generators = {"N": random_generator(mask(0, 4, 5), rng), "S": random_generator(mask(7, 9), rng)}
        with tempfile.TemporaryDirectory() as tmp:
            path = save_generators(Path(tmp) / "generators.npz", generators)
            loaded = load_generators(path)
        self.assertEqual(set(loaded), {"N", "S"})
        self.assertEqual(loaded["N"].support, generators["N"].support)
        assert_allclose(loaded["S"].X, generators["S"].X)


class LineSearchTests(SimpleTestCase):
    def test_quadratic_minimum_is_found(self):
        result = search_step(lambda dt: (dt - 0.3) ** 2, OptimizerConfig())
        self.assertFalse(result.stalled)
        self.assertAlmostEqual(result.dt, 0.3, delta=1e-2)

    def test_expansion_beyond_the_initial_step(self):
        result = search_step(lambda dt: (dt - 3.0) ** 2, OptimizerConfig())
        self.assertGreater(result.dt, 2.0)
        self.assertLess(result.h_new, 1.0)

    def test_increasing_objective_stalls(self):
        result = search_step(lambda dt: dt, OptimizerConfig(max_backtracks=5))
        self.assertTrue(result.stalled)
        self.assertEqual(result.dt, 0.0)
        self.assertEqual(result.evaluations, 6)

    @settings(deadline=None, max_examples=10)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_accepted_steps_never_increase_the_gap(self, seed):
        A, B, S = mask(0, 1), mask(2, 3), mask(1, 2, 4, 5)
        C = random_mixed_covariance(6, seed)
        h0 = markov_gap(C, A, B)
        X = gradient_generator(C, A, B, S)
        result = line_search(C, X, lambda c: markov_gap(c, A, B), OptimizerConfig(), h0)
        self.assertLessEqual(result.h_new, h0)

    def test_invalid_config(self):
        with self.assertRaises(ConfigError):
            OptimizerConfig(shrink_factor=1.5)
        with self.assertRaises(ConfigError):
            OptimizerConfig(grad_tol=0)
        with self.assertRaises(ConfigError):
            OptimizerConfig(step_size=0.1)

    def test_config_accepts_yaml_aliases(self):
        config = OptimizerConfig(MAX_ITERS=7, NOISE_SCHEDULE="plateau")
        self.assertEqual(config, OptimizerConfig(max_iters=7, noise_schedule=NoiseSchedule.PLATEAU))
        self.assertTrue(config.noise_schedule.fires_on("plateau"))
        self.assertFalse(config.noise_schedule.fires_on("stall"))


class DisentanglerTests(SimpleTestCase):
    spec = ModelSpec(1, 4, filled_bands=1)

    def setUp(self):
        self.lat = Lattice(16, 14)
        self.tp = build_tripartition(self.lat, 4, 4, margin_min=3)

    def problem(self, shape: str, R: int, spec=None, lat=None):
        lat = lat or self.lat
        tp = build_tripartition(lat, 4, 4) if lat is not self.lat else self.tp
        support = smoother_support(tp, lat, shape, R)
        modes = tp.a_mask.union(tp.b_mask, support.union)
        return covariance_real_space(spec or self.spec, lat, modes), tp, support, modes

    def test_zero_radius_returns_the_bare_gap(self):
        C, tp, support, modes = self.problem("two_circles", 0)
        report = optimize(C, tp, support, OptimizerConfig(), modes)
        self.assertEqual(report.iterations, 0)
        self.assertEqual(report.final_h, report.bare_h)
        self.assertTrue(report.converged)
        self.assertGreater(report.bare_h, 0.0)

    def test_descent_is_monotone_without_noise(self):
        C, tp, support, modes = self.problem("joint", 1)
        config = OptimizerConfig(max_iters=15, noise_schedule=NoiseSchedule.NEVER)
        report = optimize(C, tp, support, config, modes)
        trace = [row.h for row in report.h_trace]
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(trace, trace[1:])))
        self.assertLess(report.final_h, report.bare_h)
        self.assertAlmostEqual(report.final_components.markov_gap, report.final_h, places=10)
        self.assertAlmostEqual(report.bare_components.markov_gap, report.bare_h, places=10)

    def test_fixed_seed_is_deterministic(self):
        C, tp, support, modes = self.problem("two_circles", 1)
        config = OptimizerConfig(max_iters=6, rng_seed=7)
        first = optimize(C, tp, support, config, modes)
        second = optimize(C, tp, support, config, modes)
        self.assertEqual(first.final_h, second.final_h)
        self.assertEqual([r.h for r in first.h_trace], [r.h for r in second.h_trace])

    def test_final_generators_reproduce_the_final_state(self):
        C, tp, support, modes = self.problem("two_circles", 1)
        report = optimize(C, tp, support, OptimizerConfig(max_iters=5, noise_schedule="never"), modes)
        warm = optimize(
            C, tp, support, OptimizerConfig(max_iters=0), modes, initial_generators=report.generators
        )
        self.assertAlmostEqual(warm.final_h, report.final_h, places=8)
        self.assertEqual(warm.bare_h, report.bare_h)

    def test_noise_on_the_last_iteration_does_not_leak_into_the_result(self):
        C, tp, support, modes = self.problem("joint", 1)
        config = OptimizerConfig(max_iters=6, plateau_window=2, plateau_rtol=10, noise_amplitude=0.5)
        report = optimize(C, tp, support, config, modes)
        self.assertTrue(report.saddle_events)
        self.assertLessEqual(report.final_h, min(row.h for row in report.h_trace) + 1e-12)
        self.assertLessEqual(report.final_h, report.bare_h + 1e-12)
        self.assertAlmostEqual(report.final_components.markov_gap, report.final_h, places=10)
        warm = optimize(
            C, tp, support, OptimizerConfig(max_iters=0), modes, initial_generators=report.generators
        )
        self.assertAlmostEqual(warm.final_h, report.final_h, places=8)

    def test_joint_smoother_does_at_least_as_well_as_two_circles(self):
        config = OptimizerConfig(max_iters=15, noise_schedule=NoiseSchedule.NEVER)
        C, tp, support, modes = self.problem("two_circles", 1)
        circles = optimize(C, tp, support, config, modes)
        C, tp, support, modes = self.problem("joint", 1)
        joint = optimize(C, tp, support, config, modes)
        self.assertAlmostEqual(joint.bare_h, circles.bare_h, places=10)
        self.assertLessEqual(joint.final_h, circles.final_h + 1e-3)

    def test_tr_constraint_needs_the_operator(self):
        C, tp, support, modes = self.problem("joint", 1)
        with self.assertRaises(ConfigError):
            optimize(C, tp, support, OptimizerConfig(tr_constrained=True), modes)

    def test_tr_constrained_run_keeps_the_symmetry(self):
        spec = ModelSpec(1, 4, filled_bands=1, layers=(LayerSpec(1, 2.0), LayerSpec(-1, 2.0)))
        lat = Lattice(16, 14, layers=2)
        C, tp, support, modes = self.problem("joint", 1, spec, lat)
        S = tr_operator(lat, modes)
        report = optimize(C, tp, support, OptimizerConfig(max_iters=4, tr_constrained=True), modes, S)
        for gen in report.generators.values():
            local = tr_operator(lat, gen.support)
            u = exp_generator(gen, 1.0)
            assert_allclose(local @ u.conj() @ local.conj().T, u, atol=1e-8)


@unittest.skipUnless(LONG_TESTS, "set MARKOV_GAP_LONG_TESTS to run the lattice-scale suite")
class LatticeScaleTests(SimpleTestCase):
    """Reduced-size versions of the published values; hours of CPU time."""

    def run_model(self, spec, L, shape, R, layers=1, **config):
        margin = max(8, 2 * R)
        width = spec.q * int(np.ceil((2 * L + 2 * margin) / spec.q))
        lat = Lattice(width, L + 2 * margin, layers)
        tp = build_tripartition(lat, L, L)
        support = smoother_support(tp, lat, shape, R)
        modes = tp.a_mask.union(tp.b_mask, support.union)
        C = covariance_real_space(spec, lat, modes)
        tr_op = tr_operator(lat, modes) if config.get("tr_constrained") else None
        return optimize(C, tp, support, OptimizerConfig(**config), modes, tr_op)

    def test_bare_gap_of_the_quarter_flux_band(self):
        report = self.run_model(ModelSpec(1, 4, filled_bands=1), 24, "two_circles", 0)
        self.assertAlmostEqual(report.bare_h, 0.3429, delta=0.01)

    def test_bare_gap_of_the_topological_insulator(self):
        spec = ModelSpec(1, 4, filled_bands=1, layers=(LayerSpec(1, 2.0), LayerSpec(-1, 2.0)))
        report = self.run_model(spec, 24, "two_circles", 0, layers=2)
        self.assertAlmostEqual(report.bare_h, 0.6857, delta=0.015)

    def test_two_circles_approach_a_third_of_log2(self):
        finals = [
            self.run_model(ModelSpec(1, 4, filled_bands=1), 16, "two_circles", R).final_h for R in range(4)
        ]
        self.assertTrue(all(b <= a for a, b in zip(finals, finals[1:])))
        self.assertAlmostEqual(finals[-1], np.log(2) / 3, delta=0.1 * np.log(2) / 3)

    def test_joint_smoother_removes_the_gap(self):
        report = self.run_model(ModelSpec(1, 4, filled_bands=1), 16, "joint", 3)
        self.assertLess(report.final_h, 0.02)

    def test_time_reversal_pins_the_insulator_at_two_thirds_of_log2(self):
        spec = ModelSpec(1, 4, filled_bands=1, layers=(LayerSpec(1, 2.0), LayerSpec(-1, 2.0)))
        constrained = self.run_model(spec, 16, "two_circles", 3, layers=2, tr_constrained=True)
        self.assertAlmostEqual(constrained.final_h, 2 * np.log(2) / 3, delta=0.1 * 2 * np.log(2) / 3)
        free = self.run_model(spec, 16, "two_circles", 3, layers=2, max_iters=2000)
        self.assertLess(free.final_h, 0.05)
        pinned = 2 * np.log(2) / 3
        self.assertTrue(any(abs(e.h - pinned) < 0.1 * pinned for e in free.saddle_events))
        self.assertTrue(any(e.escaped for e in free.saddle_events))


@unittest.skipUnless(FULL_SIZE_TESTS, "set MARKOV_GAP_LONG_TESTS=full to run the full-size values")
class FullSizeTests(SimpleTestCase):
    """L_A = L_B = 24 values; not meant for CI."""

    run_model = LatticeScaleTests.run_model

    def test_quarter_flux_band_at_radius_four(self):
        report = self.run_model(ModelSpec(1, 4, filled_bands=1), 24, "two_circles", 4)
        self.assertAlmostEqual(report.final_h, 0.2316, delta=0.005)

    def test_radius_sweep_of_the_quarter_flux_band(self):
        expected = (0.3429, 0.2885, 0.2431, 0.2325, 0.2316)
        for R, value in enumerate(expected):
            report = self.run_model(ModelSpec(1, 4, filled_bands=1), 24, "two_circles", R)
            self.assertAlmostEqual(report.final_h, value, delta=0.005, msg=f"R={R}")

    def test_sixth_flux_two_bands_at_radius_six(self):
        report = self.run_model(ModelSpec(1, 6, filled_bands=2), 24, "two_circles", 6)
        self.assertAlmostEqual(report.final_h, 0.4641, delta=0.005)

    def test_strip_does_not_remove_the_broken_insulator_gap(self):
        spec = ModelSpec(1, 4, filled_bands=1, layers=(LayerSpec(1, 2.0), LayerSpec(-1, 2.0)))
        strip = self.run_model(spec, 24, "strip", 4, layers=2, max_iters=2000)
        self.assertAlmostEqual(strip.final_h, 0.4656, delta=0.005)

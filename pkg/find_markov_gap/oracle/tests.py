import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from find_markov_gap.gaussian import ModeMask, entropy, reflected_entropy, restrict
from find_markov_gap.oracle import (
    DenseDensity,
    DenseState,
    Statistics,
    dense_covariance,
    dense_entropy,
    dense_markov_gap,
    dense_rdm,
    dense_reflected_entropy,
    gaussian_dense_state,
    ghz_state,
    random_triangle_legs,
    run_equivalence_suite,
    slater_statevector,
    sum_of_triangles_state,
    toric_bell_factor,
    toric_sots_state,
    triangle_state,
    w_state,
)
from find_markov_gap.utils.errors import OracleCapacityError

LOG2 = math.log(2)


def mask(*indices: int) -> ModeMask:
    return ModeMask(tuple(indices))


class SlaterStateTests(SimpleTestCase):
    def test_single_occupied_mode(self):
        state = slater_statevector(np.array([[1.0], [0.0], [0.0]]))
        expected = np.zeros(8)
        expected[0b100] = 1.0
        assert_allclose(state.amplitudes, expected)

    def test_bonding_orbital(self):
        state = slater_statevector(np.array([1.0, 1.0]) / math.sqrt(2))
        assert_allclose(state.amplitudes, [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0], atol=1e-15)

    def test_dense_covariance_matches_the_orbitals(self):
        psi = unitary_group.rvs(6, random_state=np.random.default_rng(0))[:, :3]
        C = dense_covariance(slater_statevector(psi))
        assert_allclose(C, psi @ psi.conj().T, atol=1e-10)

    def test_non_orthonormal_orbitals_are_orthonormalized(self):
        rng = np.random.default_rng(1)
        psi = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
        q, _ = np.linalg.qr(psi)
        C = dense_covariance(slater_statevector(psi))
        assert_allclose(C, q @ q.conj().T, atol=1e-10)

    def test_too_many_modes(self):
        with self.assertRaises(OracleCapacityError):
            slater_statevector(np.eye(15)[:, :1])


class DenseDensityTests(SimpleTestCase):
    def test_product_state_has_a_pure_reduced_state(self):
        state = slater_statevector(np.eye(4)[:, [0, 2]])
        rho = dense_rdm(state, mask(0, 1))
        self.assertEqual(np.linalg.matrix_rank(rho.matrix, tol=1e-10), 1)
        self.assertAlmostEqual(dense_entropy(rho), 0.0, places=12)

    def test_bell_pair_half(self):
        rho = dense_rdm(ghz_state(2), mask(1))
        assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-15)

    def test_trace_must_be_one(self):
        with self.assertRaises(ValueError):
            DenseDensity(1, np.eye(2))

    def test_amplitudes_must_be_normalized(self):
        with self.assertRaises(ValueError):
            DenseState(1, np.array([1.0, 1.0]))

    def test_mode_cap(self):
        with self.assertRaises(OracleCapacityError):
            DenseState.normalized(np.ones(2**21), 21)

    def test_slater_entropies_match_the_covariance(self):
        psi = unitary_group.rvs(8, random_state=np.random.default_rng(2))[:, :4]
        C = psi @ psi.conj().T
        A = mask(0, 2, 5, 7)
        self.assertAlmostEqual(dense_entropy(dense_rdm(slater_statevector(psi), A)), entropy(restrict(C, A)), places=8)

    @settings(deadline=None, max_examples=10)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_entropy_ignores_the_order_inside_a_region(self, seed):
        rng = np.random.default_rng(seed)
        psi = unitary_group.rvs(6, random_state=rng)[:, :3]
        permuted = psi[[1, 0, 2, 3, 5, 4]]
        A = mask(0, 1, 2)
        self.assertAlmostEqual(
            dense_entropy(dense_rdm(slater_statevector(psi), A)),
            dense_entropy(dense_rdm(slater_statevector(permuted), A)),
            places=9,
        )


class ReflectedEntropyTests(SimpleTestCase):
    def test_pure_state_doubles_the_entropy(self):
        psi = unitary_group.rvs(4, random_state=np.random.default_rng(3))[:, :2]
        rho = dense_rdm(slater_statevector(psi), ModeMask.full(4))
        s_a = dense_entropy(dense_rdm(slater_statevector(psi), mask(0, 1)))
        self.assertAlmostEqual(dense_reflected_entropy(rho, 2), 2 * s_a, places=9)

    def test_maximally_mixed_product_has_none(self):
        rho = DenseDensity(2, np.eye(4) / 4)
        self.assertAlmostEqual(dense_reflected_entropy(rho, 1), 0.0, places=12)
        qubits = DenseDensity(2, np.eye(4) / 4, Statistics.QUBIT)
        self.assertAlmostEqual(dense_reflected_entropy(qubits, 1), 0.0, places=12)

    def test_mixed_gaussian_state_matches_the_covariance_formula(self):
        rng = np.random.default_rng(4)
        psi = unitary_group.rvs(10, random_state=rng)[:, :5]
        C_AB = (psi @ psi.conj().T)[:6, :6]
        state = gaussian_dense_state(C_AB, rng)
        assert_allclose(dense_covariance(state)[:6, :6], C_AB, atol=1e-10)
        rho = dense_rdm(state, ModeMask.full(6))
        self.assertAlmostEqual(
            dense_reflected_entropy(rho, 3), reflected_entropy(C_AB, mask(0, 1, 2)), delta=1e-6
        )

    def test_split_by_positions(self):
        rng = np.random.default_rng(5)
        psi = unitary_group.rvs(8, random_state=rng)[:, :4]
        C_AB = (psi @ psi.conj().T)[:4, :4]
        rho = dense_rdm(gaussian_dense_state(C_AB, rng), ModeMask.full(4))
        self.assertAlmostEqual(
            dense_reflected_entropy(rho, mask(1, 3)), reflected_entropy(C_AB, mask(1, 3)), delta=1e-6
        )

    def test_negative_density_is_rejected(self):
        rho = DenseDensity(1, np.diag([1.5, -0.5]))
        with self.assertRaises(ArithmeticError):
            dense_reflected_entropy(rho, 1)


class QubitStateTests(SimpleTestCase):
    def test_ghz_has_no_markov_gap(self):
        self.assertAlmostEqual(dense_markov_gap(ghz_state(3), mask(0), mask(1)), 0.0, delta=1e-10)

    def test_triangle_of_bell_pairs_has_no_markov_gap(self):
        tri = triangle_state()
        self.assertEqual(tri.state.n_modes, 6)
        self.assertAlmostEqual(dense_markov_gap(tri.state, tri.A, tri.B), 0.0, delta=1e-10)
        self.assertAlmostEqual(dense_entropy(dense_rdm(tri.state, tri.A)), 2 * LOG2, places=10)

    def test_w_state_has_a_positive_markov_gap(self):
        h = dense_markov_gap(w_state(3), mask(0), mask(1))
        self.assertGreater(h, 1e-3)

    @settings(deadline=None, max_examples=8)
    @given(seed=st.integers(0, 2**31 - 1), terms=st.integers(1, 2))
    def test_sums_of_triangles_have_no_markov_gap(self, seed, terms):
        rng = np.random.default_rng(seed)
        weights = rng.uniform(0.1, 1.0, size=terms)
        legs = [random_triangle_legs(rng) for _ in range(terms)]
        sots = sum_of_triangles_state(weights, legs)
        self.assertLessEqual(abs(dense_markov_gap(sots.state, sots.A, sots.B)), 1e-9)


class ToricCodeTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.toric = toric_sots_state()

    def test_sector_factors_are_orthogonal(self):
        self.assertAlmostEqual(float(np.vdot(toric_bell_factor(1), toric_bell_factor(0))), 0.0)
        self.assertAlmostEqual(float(np.linalg.norm(toric_bell_factor(1))), 1.0)

    def test_layout(self):
        self.assertEqual(self.toric.state.n_modes, 18)
        self.assertEqual(self.toric.A.indices, tuple(range(6)))
        self.assertEqual(np.count_nonzero(self.toric.state.amplitudes), 16)
        assert_allclose(self.toric.state.amplitudes[np.flatnonzero(self.toric.state.amplitudes)], 0.25)

    def test_regions_are_equivalent(self):
        entropies = [dense_entropy(dense_rdm(self.toric.state, m)) for m in (self.toric.A, self.toric.B, self.toric.C)]
        assert_allclose(entropies, entropies[0], atol=1e-10)
        self.assertAlmostEqual(entropies[0], 3 * LOG2, places=10)

    def test_markov_gap_vanishes(self):
        self.assertAlmostEqual(dense_markov_gap(self.toric.state, self.toric.A, self.toric.B), 0.0, delta=1e-10)


class EquivalenceSuiteTests(SimpleTestCase):
    def test_gaussian_and_dense_agree(self):
        summary = run_equivalence_suite(n_states=50, seed=0, min_modes=6, max_modes=8)
        self.assertEqual(len(summary.rows), 50)
        self.assertTrue(summary.passed, msg=f"max deviation {summary.max_deviation:.3e}")

    def test_mode_range_is_checked(self):
        with self.assertRaises(ValueError):
            run_equivalence_suite(n_states=1, min_modes=6, max_modes=20)

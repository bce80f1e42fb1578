import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from find_markov_gap.gaussian import (
    CovarianceMatrix,
    ModeMask,
    entanglement_hamiltonian,
    entropy,
    gap_components,
    markov_gap,
    mutual_information,
    reflected_covariance,
    reflected_entropy,
    restrict,
)
from find_markov_gap.utils.errors import CorruptCovarianceError, CovarianceValidationError, MaskError

LOG2 = math.log(2)


def random_mixed_covariance(n_modes: int, seed: int, environment: int = 4) -> np.ndarray:
    """Restriction of a random Slater state on n_modes + environment modes."""
    total = n_modes + environment
    psi = unitary_group.rvs(total, random_state=np.random.default_rng(seed))[:, : total // 2]
    return (psi @ psi.conj().T)[:n_modes, :n_modes]


def random_pure_covariance(n_modes: int, n_orbitals: int, seed: int) -> np.ndarray:
    psi = unitary_group.rvs(n_modes, random_state=np.random.default_rng(seed))[:, :n_orbitals]
    return psi @ psi.conj().T


def mask(*indices: int) -> ModeMask:
    return ModeMask(tuple(indices))


class ModeMaskTests(SimpleTestCase):
    def test_from_indices_sorts_and_dedupes(self):
        self.assertEqual(ModeMask.from_indices([3, 1, 3, 0]).indices, (0, 1, 3))

    def test_unsorted_mask_is_rejected(self):
        with self.assertRaises(MaskError):
            ModeMask((2, 1))

    def test_positions_of_relabels_into_superset(self):
        outer = mask(2, 5, 7, 9)
        self.assertEqual(outer.positions_of(mask(5, 9)).indices, (1, 3))
        with self.assertRaises(MaskError):
            outer.positions_of(mask(4))

    def test_out_of_range_restriction(self):
        with self.assertRaises(MaskError):
            restrict(np.eye(3) * 0.5, mask(0, 3))


class CovarianceValidationTests(SimpleTestCase):
    def test_non_hermitian_matrix_is_rejected(self):
        with self.assertRaises(CovarianceValidationError):
            CovarianceMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))

    def test_pure_flag_requires_projector(self):
        with self.assertRaises(CovarianceValidationError):
            CovarianceMatrix(np.eye(2) * 0.5, pure=True)
        CovarianceMatrix(random_pure_covariance(4, 2, seed=1), pure=True)

    def test_spectrum_outside_unit_interval_is_corrupt(self):
        with self.assertRaises(CorruptCovarianceError):
            entropy(np.diag([1.5, 0.2]))

    def test_eps_outside_range_is_rejected(self):
        with self.assertRaises(ValueError):
            entropy(np.eye(2) * 0.5, eps=0.1)


class EntropyTests(SimpleTestCase):
    def test_half_filled_mode_carries_log2(self):
        self.assertAlmostEqual(entropy([[0.5]]), LOG2, places=12)

    def test_product_occupations_have_no_entropy(self):
        self.assertEqual(entropy(np.diag([1.0, 0.0, 1.0])), 0.0)

    def test_empty_region(self):
        self.assertEqual(entropy(np.zeros((0, 0))), 0.0)

    def test_entanglement_hamiltonian_reproduces_covariance(self):
        C = random_mixed_covariance(4, seed=3)
        h = entanglement_hamiltonian(C).entries
        w, V = np.linalg.eigh(h)
        assert_allclose((V / (1 + np.exp(w))) @ V.conj().T, C, atol=1e-10)

    def test_entanglement_hamiltonian_is_finite_for_pure_states(self):
        h = entanglement_hamiltonian(np.diag([1.0, 0.0])).entries
        self.assertTrue(np.all(np.isfinite(h)))
        assert_allclose(np.diag(h), [math.log(1e-8 / (1 - 1e-8)), math.log((1 - 1e-8) / 1e-8)])

    def test_pure_state_entropy_is_symmetric(self):
        C = random_pure_covariance(8, 3, seed=5)
        A, rest = mask(0, 1, 2), mask(3, 4, 5, 6, 7)
        self.assertAlmostEqual(entropy(restrict(C, A)), entropy(restrict(C, rest)), places=9)


class ReflectedEntropyTests(SimpleTestCase):
    def test_dimer_saturates_reflected_entropy(self):
        C = np.full((2, 2), 0.5)
        components = gap_components(C, mask(0), mask(1))
        self.assertAlmostEqual(components.reflected_entropy, 2 * LOG2, places=10)
        self.assertAlmostEqual(components.mutual_information, 2 * LOG2, places=10)
        self.assertAlmostEqual(components.markov_gap, 0.0, places=10)

    def test_product_state_has_zero_gap(self):
        C = np.diag([0.3, 0.7])
        self.assertAlmostEqual(reflected_entropy(C, mask(0)), 0.0, places=12)
        self.assertAlmostEqual(markov_gap(C, mask(0), mask(1)), 0.0, places=12)

    def test_pure_ab_state_reflected_entropy_is_twice_the_entropy(self):
        C = random_pure_covariance(6, 3, seed=7)
        A = mask(0, 1, 2)
        self.assertAlmostEqual(reflected_entropy(C, A), 2 * entropy(restrict(C, A)), places=8)
        self.assertAlmostEqual(markov_gap(C, A, mask(3, 4, 5)), 0.0, places=8)

    def test_purification_is_pure(self):
        CR = reflected_covariance(random_mixed_covariance(5, seed=11)).covariance.entries
        assert_allclose(CR @ CR, CR, atol=1e-10)

    def test_independent_blocks_add(self):
        C1 = random_mixed_covariance(2, seed=13)
        C2 = random_mixed_covariance(2, seed=17)
        C = np.block([[C1, np.zeros((2, 2))], [np.zeros((2, 2)), C2]])
        self.assertAlmostEqual(entropy(C), entropy(C1) + entropy(C2), places=10)
        self.assertAlmostEqual(mutual_information(C, mask(0, 1), mask(2, 3)), 0.0, places=10)

    def test_overlapping_regions_are_rejected(self):
        with self.assertRaises(MaskError):
            markov_gap(np.eye(3) * 0.5, mask(0, 1), mask(1, 2))

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 2**31 - 1), n_a=st.integers(1, 3), n_b=st.integers(1, 3))
    def test_markov_gap_is_nonnegative(self, seed, n_a, n_b):
        C = random_mixed_covariance(n_a + n_b, seed)
        A = ModeMask(tuple(range(n_a)))
        B = ModeMask(tuple(range(n_a, n_a + n_b)))
        self.assertGreaterEqual(markov_gap(C, A, B), -1e-10)

    @settings(deadline=None, max_examples=15)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_local_unitaries_leave_the_gap_unchanged(self, seed):
        rng = np.random.default_rng(seed)
        C = random_mixed_covariance(5, seed)
        A, B = mask(0, 1), mask(2, 3, 4)
        U = np.zeros((5, 5), dtype=np.complex128)
        U[:2, :2] = unitary_group.rvs(2, random_state=rng)
        U[2:, 2:] = unitary_group.rvs(3, random_state=rng)
        rotated = CovarianceMatrix.hermitized(U @ C @ U.conj().T)
        self.assertAlmostEqual(markov_gap(rotated, A, B), markov_gap(C, A, B), places=8)

    @settings(deadline=None, max_examples=10)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_relabeling_within_a_region_is_harmless(self, seed):
        C = random_mixed_covariance(4, seed)
        P = np.eye(4)[[1, 0, 3, 2]]
        swapped = P @ C @ P.T
        A, B = mask(0, 1), mask(2, 3)
        self.assertAlmostEqual(markov_gap(swapped, A, B), markov_gap(C, A, B), places=9)

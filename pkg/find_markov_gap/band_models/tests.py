import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from find_markov_gap.band_models import (
    LayerSpec,
    ModelSpec,
    band_gap,
    bloch_hamiltonian,
    chern_number,
    correlation_length,
    covariance_real_space,
    diophantine_chern,
    direct_covariance,
    filled_band_count,
    layer_chern_numbers,
    real_space_hamiltonian,
    solve_bands,
    solve_lattice_bands,
    stack,
    tr_operator,
    tr_residual,
)
from find_markov_gap.gaussian import ModeMask, spectrum
from find_markov_gap.geometry import Lattice
from find_markov_gap.utils.config import MIN_MARGIN
from find_markov_gap.utils.errors import ModelError, NumericError

HOFSTADTER_QUARTER = ModelSpec(1, 4, filled_bands=1)
TOPOLOGICAL_INSULATOR = ModelSpec(1, 4, filled_bands=1, layers=(LayerSpec(1, 2.0), LayerSpec(-1, 2.0)))


class ModelSpecTests(SimpleTestCase):
    def test_flux_must_be_reduced(self):
        with self.assertRaises(ModelError):
            ModelSpec(2, 4)

    def test_filled_bands_range(self):
        with self.assertRaises(ModelError):
            ModelSpec(1, 4, filled_bands=5)

    def test_layers_flip_the_flux(self):
        self.assertEqual(TOPOLOGICAL_INSULATOR.n_layers, 2)
        self.assertEqual(TOPOLOGICAL_INSULATOR.layer(1).p, -1)
        self.assertEqual(TOPOLOGICAL_INSULATOR.layer(1).mu, 2.0)
        with self.assertRaises(ModelError):
            TOPOLOGICAL_INSULATOR.single_layer()


class BlochHamiltonianTests(SimpleTestCase):
    def test_hermitian_on_a_grid(self):
        kx, ky = np.meshgrid(np.linspace(0, np.pi / 2, 5), np.linspace(0, 2 * np.pi, 7), indexing="ij")
        h = bloch_hamiltonian(HOFSTADTER_QUARTER, kx, ky)
        self.assertEqual(h.shape, (5, 7, 4, 4))
        assert_allclose(h, np.conj(np.swapaxes(h, -1, -2)))

    def test_zero_flux_is_the_square_lattice_dispersion(self):
        h = bloch_hamiltonian(ModelSpec(0, 1), 0.3, 1.1)
        assert_allclose(h, [[-2 * np.cos(0.3) - 2 * np.cos(1.1)]])

    def test_bloch_spectrum_matches_the_real_space_hamiltonian(self):
        lat = Lattice(8, 6)
        sol = solve_lattice_bands(HOFSTADTER_QUARTER, lat)
        bloch = np.sort(sol.energies.reshape(-1))
        real = np.linalg.eigvalsh(real_space_hamiltonian(HOFSTADTER_QUARTER, lat))
        assert_allclose(bloch, real, atol=1e-10)

    def test_lattice_width_must_match_q(self):
        with self.assertRaises(ModelError):
            solve_lattice_bands(HOFSTADTER_QUARTER, Lattice(10, 8))


class CovarianceTests(SimpleTestCase):
    def test_fft_covariance_matches_direct_diagonalization(self):
        lat = Lattice(12, 12)
        fast = covariance_real_space(HOFSTADTER_QUARTER, lat).entries
        direct = direct_covariance(HOFSTADTER_QUARTER, lat).entries
        assert_allclose(fast, direct, atol=1e-10)

    def test_filled_band_is_a_projector_with_quarter_filling(self):
        lat = Lattice(12, 8)
        C = covariance_real_space(HOFSTADTER_QUARTER, lat).entries
        assert_allclose(C @ C, C, atol=1e-10)
        self.assertAlmostEqual(np.trace(C).real, lat.n_sites / 4, places=8)

    def test_masked_covariance_is_the_principal_submatrix(self):
        lat = Lattice(8, 8)
        sub = ModeMask((0, 3, 9, 17, 40, 63))
        full = covariance_real_space(HOFSTADTER_QUARTER, lat).entries
        part = covariance_real_space(HOFSTADTER_QUARTER, lat, sub).entries
        assert_allclose(part, full[np.ix_(sub.array, sub.array)], atol=1e-12)

    def test_layer_count_must_match_the_lattice(self):
        with self.assertRaises(ModelError):
            covariance_real_space(TOPOLOGICAL_INSULATOR, Lattice(8, 8))

    def test_layered_covariance_is_block_diagonal(self):
        lat = Lattice(8, 8, layers=2)
        C = covariance_real_space(TOPOLOGICAL_INSULATOR, lat).entries
        n = lat.n_sites
        assert_allclose(C[:n, n:], 0.0)
        stacked = stack([
            covariance_real_space(TOPOLOGICAL_INSULATOR.layer(0), Lattice(8, 8)),
            covariance_real_space(TOPOLOGICAL_INSULATOR.layer(1), Lattice(8, 8)),
        ]).entries
        assert_allclose(C, stacked, atol=1e-12)

    def test_stack_rejects_mismatched_layers(self):
        a = covariance_real_space(HOFSTADTER_QUARTER, Lattice(4, 4))
        b = covariance_real_space(HOFSTADTER_QUARTER, Lattice(8, 4))
        with self.assertRaises(ModelError):
            stack([a, b])
        with self.assertRaises(ModelError):
            stack([])

    def test_topological_insulator_is_time_reversal_invariant(self):
        lat = Lattice(8, 8, layers=2)
        C = covariance_real_space(TOPOLOGICAL_INSULATOR, lat)
        self.assertLess(tr_residual(C, tr_operator(lat)), 1e-9)

    def test_single_layer_breaks_time_reversal(self):
        broken = ModelSpec(1, 4, filled_bands=1, layers=(LayerSpec(1, 2.0), LayerSpec(1, 2.0)))
        lat = Lattice(8, 8, layers=2)
        self.assertGreater(tr_residual(covariance_real_space(broken, lat), tr_operator(lat)), 1e-3)

    def test_time_reversal_needs_two_layers(self):
        with self.assertRaises(ModelError):
            tr_operator(Lattice(4, 4))


class CorrelationLengthTests(SimpleTestCase):
    def test_gapped_band_decays_within_the_default_margin(self):
        xi = correlation_length(HOFSTADTER_QUARTER, Lattice(24, 24))
        self.assertTrue(np.isfinite(xi))
        self.assertGreater(xi, 0.0)
        self.assertLess(xi, MIN_MARGIN)

    def test_time_reversed_layers_share_the_decay_length(self):
        single = correlation_length(HOFSTADTER_QUARTER, Lattice(24, 24))
        paired = correlation_length(TOPOLOGICAL_INSULATOR, Lattice(24, 24, layers=2))
        self.assertAlmostEqual(paired, single, delta=1e-3 * single)
        self.assertLess(paired, MIN_MARGIN)

    def test_filled_lattice_has_no_correlations_to_fit(self):
        with self.assertRaises(NumericError):
            correlation_length(ModelSpec(1, 4, filled_bands=4), Lattice(16, 16))


class TopologyTests(SimpleTestCase):
    def test_quarter_flux_lowest_band(self):
        sol = solve_bands(HOFSTADTER_QUARTER, 24)
        self.assertEqual(chern_number(sol, [0]), 1)

    def test_sixth_flux_lowest_two_bands(self):
        sol = solve_bands(ModelSpec(1, 6), 24)
        self.assertEqual(chern_number(sol, [0, 1]), 2)
        self.assertEqual(chern_number(sol, [0]), 1)
        self.assertEqual(chern_number(sol, [1]), 1)

    def test_third_flux_band_sequence(self):
        sol = solve_bands(ModelSpec(1, 3), 24)
        self.assertEqual([chern_number(sol, [n]) for n in range(3)], [1, -2, 1])

    def test_topological_insulator_layers_are_opposite(self):
        self.assertEqual(layer_chern_numbers(TOPOLOGICAL_INSULATOR, 24), [1, -1])

    def test_all_bands_carry_no_chern_number(self):
        sol = solve_bands(HOFSTADTER_QUARTER, 12)
        self.assertEqual(chern_number(sol, range(4)), 0)

    def test_diophantine_prediction(self):
        self.assertEqual(diophantine_chern(1, 4, 1), 1)
        self.assertEqual(diophantine_chern(-1, 4, 1), -1)
        self.assertEqual(diophantine_chern(1, 6, 2), 2)
        self.assertEqual(diophantine_chern(1, 3, 2), -1)
        self.assertEqual(diophantine_chern(1, 4, 4), 0)
        self.assertIsNone(diophantine_chern(1, 4, 2))

    def test_lowest_band_is_isolated(self):
        sol = solve_bands(HOFSTADTER_QUARTER, 24)
        self.assertGreater(band_gap(sol, 1), 0.5)
        self.assertEqual(band_gap(sol, 0), float("inf"))

    def test_chemical_potential_inside_a_band(self):
        sol = solve_bands(ModelSpec(1, 4), 16)
        lowest = sol.energies[..., 0]
        mu = -0.5 * (lowest.min() + lowest.max())
        spec = ModelSpec(1, 4, mu=mu)
        with self.assertRaisesRegex(ModelError, "crosses a band"):
            filled_band_count(spec, solve_bands(spec, 16))

    def test_chemical_potential_in_a_gap(self):
        sol = solve_bands(ModelSpec(1, 4), 16)
        mu = -0.5 * (sol.energies[..., 0].max() + sol.energies[..., 1].min())
        spec = ModelSpec(1, 4, mu=mu)
        self.assertEqual(filled_band_count(spec, solve_bands(spec, 16)), 1)
        lam, _ = spectrum(covariance_real_space(spec, Lattice(8, 8)))
        assert_allclose(np.minimum(lam, 1 - lam), 0.0, atol=1e-10)

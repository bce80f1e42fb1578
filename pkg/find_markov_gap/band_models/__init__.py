from find_markov_gap.band_models.hofstadter import (
    BlochSolution,
    LayerSpec,
    ModelSpec,
    bloch_hamiltonian,
    correlation_length,
    covariance_real_space,
    direct_covariance,
    occupations,
    real_space_hamiltonian,
    solve_bands,
    solve_lattice_bands,
    stack,
)
from find_markov_gap.band_models.time_reversal import is_tr_closed, tr_operator, tr_residual
from find_markov_gap.band_models.topology import (
    band_gap,
    berry_flux,
    chern_number,
    diophantine_chern,
    filled_band_count,
    layer_chern_numbers,
)

__all__ = [
    "BlochSolution",
    "LayerSpec",
    "ModelSpec",
    "bloch_hamiltonian",
    "correlation_length",
    "covariance_real_space",
    "direct_covariance",
    "occupations",
    "real_space_hamiltonian",
    "solve_bands",
    "solve_lattice_bands",
    "stack",
    "is_tr_closed",
    "tr_operator",
    "tr_residual",
    "band_gap",
    "berry_flux",
    "chern_number",
    "diophantine_chern",
    "filled_band_count",
    "layer_chern_numbers",
]

from find_markov_gap.oracle.dense import (
    DenseDensity,
    DenseState,
    Statistics,
    dense_covariance,
    dense_entropy,
    dense_gap_components,
    dense_markov_gap,
    dense_rdm,
    dense_reflected_entropy,
    slater_statevector,
)
from find_markov_gap.oracle.equivalence import (
    EquivalenceRow,
    EquivalenceSummary,
    compare_slater,
    random_bipartition,
    random_slater_orbitals,
    run_equivalence_suite,
)
from find_markov_gap.oracle.states import (
    TripartiteState,
    gaussian_dense_state,
    ghz_state,
    random_triangle_legs,
    sum_of_triangles_state,
    toric_bell_factor,
    toric_sots_state,
    triangle_state,
    w_state,
)

__all__ = [
    "DenseDensity",
    "DenseState",
    "Statistics",
    "dense_covariance",
    "dense_entropy",
    "dense_gap_components",
    "dense_markov_gap",
    "dense_rdm",
    "dense_reflected_entropy",
    "slater_statevector",
    "EquivalenceRow",
    "EquivalenceSummary",
    "compare_slater",
    "random_bipartition",
    "random_slater_orbitals",
    "run_equivalence_suite",
    "TripartiteState",
    "gaussian_dense_state",
    "ghz_state",
    "random_triangle_legs",
    "sum_of_triangles_state",
    "toric_bell_factor",
    "toric_sots_state",
    "triangle_state",
    "w_state",
]

from find_markov_gap.gaussian.modes import ModeMask, require_disjoint
from find_markov_gap.gaussian.covariance import (
    CovarianceMatrix,
    EntanglementHamiltonian,
    GapComponents,
    ReflectedCovariance,
    as_covariance,
    binary_entropy,
    entanglement_hamiltonian,
    entropy,
    gap_components,
    markov_gap,
    mutual_information,
    reflected_covariance,
    reflected_entropy,
    restrict,
    spectrum,
)

__all__ = [
    "ModeMask",
    "require_disjoint",
    "CovarianceMatrix",
    "EntanglementHamiltonian",
    "GapComponents",
    "ReflectedCovariance",
    "as_covariance",
    "binary_entropy",
    "entanglement_hamiltonian",
    "entropy",
    "gap_components",
    "markov_gap",
    "mutual_information",
    "reflected_covariance",
    "reflected_entropy",
    "restrict",
    "spectrum",
]

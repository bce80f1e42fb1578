"""
Entanglement quantities of particle-number conserving Gaussian fermionic states.

A state is described by its covariance matrix C_ij = <c_i^dagger c_j>. Every
quantity here is a spectral function of a principal submatrix of C; matrix
functions go through Hermitian eigendecompositions. Entropies are in nats.
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.special import xlogy

from find_markov_gap.gaussian.modes import ModeMask, require_disjoint
from find_markov_gap.utils.errors import (
    CorruptCovarianceError,
    CovarianceValidationError,
    NumericError,
)

HERMITIAN_TOL = 1e-12
PURITY_TOL = 1e-8
SPECTRUM_TOL = 1e-6
ENTROPY_EPS = 1e-12
HAMILTONIAN_EPS = 1e-8


def _frozen_array(entries) -> np.ndarray:
    arr = np.array(entries)
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64)
    arr.setflags(write=False)
    return arr


def _check_hermitian(arr: np.ndarray, what: str) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise CovarianceValidationError(f"{what} must be square, got shape {arr.shape}")
    if arr.size and np.max(np.abs(arr - arr.conj().T)) > HERMITIAN_TOL:
        raise CovarianceValidationError(f"{what} is not Hermitian")


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray
    pure: bool = False

    def __post_init__(self) -> None:
        arr = _frozen_array(self.entries)
        _check_hermitian(arr, "Covariance matrix")
        if self.pure and arr.size and np.max(np.abs(arr @ arr - arr)) > PURITY_TOL:
            raise CovarianceValidationError("Covariance marked pure is not a projector")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def hermitized(cls, entries, pure: bool = False) -> "CovarianceMatrix":
        """Build from a matrix that is Hermitian only up to round-off."""
        arr = np.asarray(entries)
        return cls(0.5 * (arr + arr.conj().T), pure=pure)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def restrict(self, mask: ModeMask) -> "CovarianceMatrix":
        return restrict(self, mask)


@dataclass(frozen=True)
class EntanglementHamiltonian:
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.entries)
        _check_hermitian(arr, "Entanglement Hamiltonian")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ReflectedCovariance:
    """Covariance of the canonical purification, auxiliary mode i' = base_dim + i."""

    base_dim: int
    entries: np.ndarray
    off_diagonal: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        arr = _frozen_array(self.entries)
        _check_hermitian(arr, "Reflected covariance")
        if arr.shape[0] != 2 * self.base_dim:
            raise CovarianceValidationError("Reflected covariance must have twice the base dimension")
        object.__setattr__(self, "entries", arr)

    @property
    def covariance(self) -> CovarianceMatrix:
        return CovarianceMatrix(self.entries)

    def doubled(self, mask: ModeMask) -> ModeMask:
        """Mask of ``mask`` together with its auxiliary copies."""
        mask.check_range(self.base_dim)
        return ModeMask(mask.indices + mask.shifted(self.base_dim).indices)


class GapComponents(NamedTuple):
    reflected_entropy: float
    mutual_information: float
    markov_gap: float


def as_covariance(C) -> CovarianceMatrix:
    return C if isinstance(C, CovarianceMatrix) else CovarianceMatrix(C)


def restrict(C, mask: ModeMask) -> CovarianceMatrix:
    """Principal submatrix on ``mask``, keeping the mask ordering."""
    C = as_covariance(C)
    mask.check_range(C.dim)
    idx = mask.array
    return CovarianceMatrix(C.entries[np.ix_(idx, idx)])


def spectrum(C) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a covariance, with the range check applied."""
    C = as_covariance(C)
    if C.dim == 0:
        return np.zeros(0), np.zeros((0, 0))
    try:
        lam, vecs = scipy.linalg.eigh(C.entries)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"Eigendecomposition of a {C.dim}-mode covariance failed: {e}") from e
    if lam[0] < -SPECTRUM_TOL or lam[-1] > 1 + SPECTRUM_TOL:
        raise CorruptCovarianceError(
            f"Covariance spectrum [{lam[0]:.3e}, {lam[-1]:.3e}] outside [0, 1]"
        )
    return lam, vecs


def _check_eps(eps: float) -> None:
    if not 0 < eps <= 1e-4:
        raise ValueError(f"Eigenvalue clamp eps must lie in (0, 1e-4], got {eps}")


def entanglement_hamiltonian(C_A, eps: float = HAMILTONIAN_EPS) -> EntanglementHamiltonian:
    """h_A = log((I - C_A) / C_A) with eigenvalues clamped into [eps, 1 - eps]."""
    _check_eps(eps)
    lam, vecs = spectrum(C_A)
    lam = np.clip(lam, eps, 1 - eps)
    h = (vecs * np.log((1 - lam) / lam)) @ vecs.conj().T
    return EntanglementHamiltonian(0.5 * (h + h.conj().T))


def binary_entropy(lam: np.ndarray, eps: float = ENTROPY_EPS) -> np.ndarray:
    """Per-mode entropy s(lam); modes within eps of 0 or 1 contribute 0."""
    lam = np.clip(np.asarray(lam, dtype=np.float64), 0.0, 1.0)
    s = -xlogy(lam, lam) - xlogy(1 - lam, 1 - lam)
    s[(lam < eps) | (lam > 1 - eps)] = 0.0
    return s


def entropy(C_A, eps: float = ENTROPY_EPS) -> float:
    _check_eps(eps)
    lam, _ = spectrum(C_A)
    return float(np.sum(binary_entropy(lam, eps)))


def mutual_information(C, A: ModeMask, B: ModeMask, eps: float = ENTROPY_EPS) -> float:
    require_disjoint(A, B)
    C = as_covariance(C)
    return (
        entropy(restrict(C, A), eps)
        + entropy(restrict(C, B), eps)
        - entropy(restrict(C, A.union(B)), eps)
    )


def reflected_covariance(C_AB, eps: float = ENTROPY_EPS) -> ReflectedCovariance:
    """Covariance [[C, K], [K, I - C]] of the canonical purification, K = sqrt(C(I - C))."""
    lam, vecs = spectrum(C_AB)
    n = len(lam)
    lam = np.clip(lam, 0.0, 1.0)
    K = (vecs * np.sqrt(lam * (1 - lam))) @ vecs.conj().T
    K = 0.5 * (K + K.conj().T)
    C = as_covariance(C_AB).entries
    full = np.block([[C, K], [K, np.eye(n) - C]])
    return ReflectedCovariance(base_dim=n, entries=full, off_diagonal=K)


def reflected_entropy(C_AB, A: ModeMask, eps: float = ENTROPY_EPS) -> float:
    CR = reflected_covariance(C_AB, eps)
    return entropy(restrict(CR.covariance, CR.doubled(A)), eps)


def gap_components(C, A: ModeMask, B: ModeMask, eps: float = ENTROPY_EPS) -> GapComponents:
    require_disjoint(A, B)
    C = as_covariance(C)
    AB = A.union(B)
    C_AB = restrict(C, AB)
    a_loc, b_loc = AB.positions_of(A), AB.positions_of(B)
    s_r = reflected_entropy(C_AB, a_loc, eps)
    mi = mutual_information(C_AB, a_loc, b_loc, eps)
    h = s_r - mi
    if h < -1e-8:
        logging.warning(f"Markov gap {h:.3e} below zero beyond round-off")
    return GapComponents(s_r, mi, h)


def markov_gap(C, A: ModeMask, B: ModeMask, eps: float = ENTROPY_EPS) -> float:
    """h(A:B) = S_R(A:B) - I(A:B) of the state restricted to A and B."""
    return gap_components(C, A, B, eps).markov_gap

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from find_markov_gap.band_models import is_tr_closed
from find_markov_gap.gaussian import CovarianceMatrix, ModeMask, as_covariance
from find_markov_gap.utils.errors import CovarianceValidationError, GeometryError

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Generator:
    """Hermitian X acting on the modes of ``support``; the unitary is exp(i X dt)."""

    support: ModeMask
    X: np.ndarray

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=np.complex128).reshape(len(self.support), len(self.support))
        if X.size and np.max(np.abs(X - X.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(X))):
            raise CovarianceValidationError("Generator is not Hermitian")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @classmethod
    def hermitized(cls, support: ModeMask, X: np.ndarray) -> "Generator":
        X = np.asarray(X)
        return cls(support, 0.5 * (X + X.conj().T))

    @classmethod
    def zero(cls, support: ModeMask) -> "Generator":
        return cls(support, np.zeros((len(support), len(support))))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.X)) if self.X.size else 0.0


def exp_generator(X: Generator, dt: float) -> np.ndarray:
    """Single-particle unitary exp(i X dt) on the support modes."""
    if not len(X.support):
        return np.zeros((0, 0), dtype=np.complex128)
    w, W = scipy.linalg.eigh(X.X)
    return (W * np.exp(1j * w * dt)) @ W.conj().T


def apply_unitary(C, X: Generator, dt: float) -> CovarianceMatrix:
    """C' = exp(i X dt) C exp(-i X dt), acting on the rows and columns of X.support."""
    C = as_covariance(C)
    if dt == 0 or not len(X.support):
        return C
    X.support.check_range(C.dim)
    u = exp_generator(X, dt)
    s = X.support.array
    rotated = np.array(C.entries, dtype=np.complex128)
    rotated[s, :] = u @ rotated[s, :]
    rotated[:, s] = rotated[:, s] @ u.conj().T
    return CovarianceMatrix.hermitized(rotated)


def generator_from_unitary(u: np.ndarray, support: ModeMask) -> Generator:
    """Hermitian X with exp(i X) = u, from the complex Schur form of the normal matrix u."""
    if not len(support):
        return Generator.zero(support)
    T, Z = scipy.linalg.schur(np.asarray(u, dtype=np.complex128), output="complex")
    X = (Z * np.angle(np.diag(T))) @ Z.conj().T
    return Generator.hermitized(support, X)


def restrict_operator(S: np.ndarray, support: ModeMask) -> np.ndarray:
    """Return ``S`` on the support, accepting either a support-sized or an enclosing operator."""
    if S.shape[0] == len(support):
        return S
    support.check_range(S.shape[0])
    return S[np.ix_(support.array, support.array)]


def project_tr(X: Generator, S: np.ndarray) -> Generator:
    """(X + S conj(X) S) / 2, whose exponential commutes with the antiunitary S K."""
    S_s = restrict_operator(np.asarray(S), X.support)
    if not is_tr_closed(S_s):
        raise GeometryError("Smoother support is not closed under layer exchange")
    return Generator.hermitized(X.support, 0.5 * (X.X + S_s @ X.X.conj() @ S_s))


def combine(generators: Sequence[Generator]) -> Generator:
    """Block generator on the union of disjoint supports."""
    if len(generators) == 1:
        return generators[0]
    support = ModeMask().union(*(g.support for g in generators))
    if len(support) != sum(len(g.support) for g in generators):
        raise GeometryError("Generator supports overlap")
    X = np.zeros((len(support), len(support)), dtype=np.complex128)
    for g in generators:
        pos = support.positions_of(g.support).array
        X[np.ix_(pos, pos)] = g.X
    return Generator.hermitized(support, X)


def random_generator(support: ModeMask, rng: np.random.Generator) -> Generator:
    """Random Hermitian generator with unit Frobenius norm (zero on an empty support)."""
    n = len(support)
    if not n:
        return Generator.zero(support)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = 0.5 * (Z + Z.conj().T)
    return Generator.hermitized(support, H / np.linalg.norm(H))

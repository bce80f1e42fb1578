"""
First-order variations of the Markov gap.

Every kernel K here satisfies dF = Tr(dC K) for the corresponding functional F
of the AB covariance, so that the descent generator on a smoother support S is
X_S = -i [C, h_R - h_I]_S.
"""
import numpy as np

from find_markov_gap.gaussian import (
    EntanglementHamiltonian,
    ModeMask,
    as_covariance,
    entanglement_hamiltonian,
    reflected_covariance,
    restrict,
    spectrum,
)
from find_markov_gap.gaussian.covariance import HAMILTONIAN_EPS
from find_markov_gap.gaussian.modes import require_disjoint
from find_markov_gap.optimizer.generators import Generator

DENOMINATOR_FLOOR = 1e-10


def _embed(block: np.ndarray, positions: ModeMask, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=np.complex128)
    idx = positions.array
    out[np.ix_(idx, idx)] = block
    return out


def mutual_info_kernel(C_AB, A: ModeMask, B: ModeMask, eps: float = HAMILTONIAN_EPS) -> EntanglementHamiltonian:
    """h_I = h_A + h_B - h_AB, each embedded with zeros into the modes of C_AB."""
    require_disjoint(A, B)
    C = as_covariance(C_AB)
    AB = A.union(B)
    h = (
        _embed(entanglement_hamiltonian(restrict(C, A), eps).entries, A, C.dim)
        + _embed(entanglement_hamiltonian(restrict(C, B), eps).entries, B, C.dim)
        - _embed(entanglement_hamiltonian(restrict(C, AB), eps).entries, AB, C.dim)
    )
    return EntanglementHamiltonian(0.5 * (h + h.conj().T))


def reflected_kernel(C_AB, A: ModeMask, eps: float = HAMILTONIAN_EPS) -> np.ndarray:
    """
    Kernel of the reflected entropy on the AB modes.

    Built from the blocks h00, h01, h10, h11 of the AA' entanglement Hamiltonian
    of the purification and the eigenbasis (r, U) of C_AB; the off-diagonal term
    is the variation of sqrt(C(1 - C)), divided by sqrt(q_a) + sqrt(q_b) with
    q = r(1 - r). Pairs whose denominator vanishes are dropped.
    """
    C = as_covariance(C_AB)
    n, na = C.dim, len(A)
    r, U = spectrum(C)
    r = np.clip(r, 0.0, 1.0)
    CR = reflected_covariance(C)
    h_aa = entanglement_hamiltonian(restrict(CR.covariance, CR.doubled(A)), eps).entries
    h00, h01 = h_aa[:na, :na], h_aa[:na, na:]
    h10, h11 = h_aa[na:, :na], h_aa[na:, na:]

    diagonal_part = _embed(h00 - h11, A, n)
    coupling = U.conj().T @ _embed(h01 + h10, A, n) @ U

    root_q = np.sqrt(r * (1 - r))
    denominator = root_q[:, None] + root_q[None, :]
    numerator = 1 - r[:, None] - r[None, :]
    small = denominator < DENOMINATOR_FLOOR
    factor = np.where(small, 0.0, numerator / np.where(small, 1.0, denominator))

    kernel = diagonal_part + U @ (factor * coupling) @ U.conj().T
    return 0.5 * (kernel + kernel.conj().T)


def gap_kernel(C_ABS, A: ModeMask, B: ModeMask, eps: float = HAMILTONIAN_EPS) -> np.ndarray:
    """h_R - h_I on the AB modes, embedded with zeros into all modes of C_ABS."""
    C = as_covariance(C_ABS)
    AB = A.union(B)
    C_AB = restrict(C, AB)
    a, b = AB.positions_of(A), AB.positions_of(B)
    h_ab = reflected_kernel(C_AB, a, eps) - mutual_info_kernel(C_AB, a, b, eps).entries
    return _embed(h_ab, AB, C.dim)


def descent_commutator(C_ABS, A: ModeMask, B: ModeMask, eps: float = HAMILTONIAN_EPS) -> np.ndarray:
    """[C, h_R - h_I] on all modes; anti-Hermitian."""
    C = as_covariance(C_ABS).entries
    H = gap_kernel(C_ABS, A, B, eps)
    return C @ H - H @ C


def generator_from_commutator(G: np.ndarray, S_mask: ModeMask) -> Generator:
    idx = S_mask.array
    return Generator.hermitized(S_mask, -1j * G[np.ix_(idx, idx)])


def gradient_generator(C_ABS, A: ModeMask, B: ModeMask, S_mask: ModeMask, eps: float = HAMILTONIAN_EPS) -> Generator:
    """X_S = -i [C_ABS, h_R - h_I]_S; along exp(i X t) the gap changes at rate -|X|_F^2."""
    if not len(S_mask):
        return Generator.zero(S_mask)
    return generator_from_commutator(descent_commutator(C_ABS, A, B, eps), S_mask)

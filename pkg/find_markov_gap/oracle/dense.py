"""
Brute-force many-body reference for the Gaussian formulas.

Basis states are occupation patterns with mode 0 as the most significant bit,
i.e. |n_0 n_1 ...> = (c_0^dag)^{n_0} (c_1^dag)^{n_1} ... |0>. Fermionic mode
permutations pick up the sign of the induced reordering of creation operators.
"""
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
import scipy.linalg
from scipy.special import xlogy

from find_markov_gap.gaussian import GapComponents, ModeMask, require_disjoint
from find_markov_gap.utils.errors import NumericError, OracleCapacityError

MAX_MODES = 20
MAX_SLATER_MODES = 14
MAX_DENSITY_MODES = 14
EIGEN_FLOOR = 1e-12


class Statistics(str, Enum):
    FERMIONIC = "fermionic"
    QUBIT = "qubit"


@dataclass(frozen=True)
class DenseState:
    n_modes: int
    amplitudes: np.ndarray
    statistics: Statistics = Statistics.FERMIONIC

    def __post_init__(self) -> None:
        if not 0 <= self.n_modes <= MAX_MODES:
            raise OracleCapacityError(f"Dense states are capped at {MAX_MODES} modes, got {self.n_modes}")
        amps = np.array(self.amplitudes).reshape(-1)
        if amps.size != 2**self.n_modes:
            raise ValueError(f"Expected {2 ** self.n_modes} amplitudes, got {amps.size}")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise ValueError("Dense state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "statistics", Statistics(self.statistics))

    @classmethod
    def normalized(cls, amplitudes, n_modes: int, statistics=Statistics.FERMIONIC) -> "DenseState":
        amps = np.asarray(amplitudes)
        return cls(n_modes, amps / np.linalg.norm(amps), statistics)

    @property
    def fermionic(self) -> bool:
        return self.statistics is Statistics.FERMIONIC


@dataclass(frozen=True)
class DenseDensity:
    n_modes: int
    matrix: np.ndarray
    statistics: Statistics = Statistics.FERMIONIC

    def __post_init__(self) -> None:
        rho = np.array(self.matrix)
        if rho.shape != (2**self.n_modes, 2**self.n_modes):
            raise ValueError(f"Density matrix shape {rho.shape} does not match {self.n_modes} modes")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("Density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-10:
            raise ValueError(f"Density matrix has trace {np.trace(rho).real:.12f}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)
        object.__setattr__(self, "statistics", Statistics(self.statistics))


def occupation_table(n_modes: int) -> np.ndarray:
    """Bits of every basis index, shape (2**n, n), mode 0 most significant."""
    shifts = n_modes - 1 - np.arange(n_modes)
    return ((np.arange(2**n_modes)[:, None] >> shifts) & 1).astype(np.int8)


def _permute_modes(amplitudes: np.ndarray, n_modes: int, order, fermionic: bool) -> np.ndarray:
    """Amplitudes in the mode order ``order`` (new position -> old mode)."""
    order = list(order)
    amps = amplitudes
    if fermionic:
        occ = occupation_table(n_modes)
        parity = np.zeros(2**n_modes, dtype=np.int64)
        for i, j in itertools.combinations(range(n_modes), 2):
            if order[i] > order[j]:
                parity += occ[:, order[i]] & occ[:, order[j]]
        amps = np.where(parity % 2, -amps, amps)
    return amps.reshape((2,) * n_modes).transpose(order).reshape(-1)


def _spectrum_entropy(p: np.ndarray) -> float:
    p = np.clip(p, 0.0, None)
    return float(-np.sum(xlogy(p, p)))


def _schmidt_entropy(vector: np.ndarray, left_modes: int) -> float:
    M = vector.reshape(2**left_modes, -1)
    s = scipy.linalg.svdvals(M)
    return _spectrum_entropy(s**2)


def slater_statevector(orbitals) -> DenseState:
    """
    Occupation amplitudes of the Slater determinant whose covariance is psi psi^dag.

    The amplitude of an occupied set O (ascending) is det(conj(psi[O, :])).
    """
    psi = np.atleast_2d(np.asarray(orbitals, dtype=np.complex128))
    if psi.shape[0] == 1 and psi.shape[1] > 1 and np.ndim(orbitals) == 1:
        psi = psi.T
    N, n = psi.shape
    if N > MAX_SLATER_MODES:
        raise OracleCapacityError(f"Slater states are capped at {MAX_SLATER_MODES} modes, got {N}")
    if n > N:
        raise ValueError(f"{n} orbitals do not fit in {N} modes")
    if n and np.max(np.abs(psi.conj().T @ psi - np.eye(n))) > 1e-12:
        psi, _ = scipy.linalg.qr(psi, mode="economic")
    amplitudes = np.zeros(2**N, dtype=np.complex128)
    if n == 0:
        amplitudes[0] = 1.0
        return DenseState(N, amplitudes)
    occupied = np.array(list(itertools.combinations(range(N), n)))
    weights = 2 ** (N - 1 - occupied)
    amplitudes[weights.sum(axis=1)] = np.linalg.det(psi.conj()[occupied])
    return DenseState.normalized(amplitudes, N)


def _annihilate(state: DenseState, mode: int) -> np.ndarray:
    """c_mode |psi> as a raw amplitude vector."""
    occ = occupation_table(state.n_modes)
    filled = np.flatnonzero(occ[:, mode])
    sign = np.where(occ[filled, :mode].sum(axis=1) % 2, -1.0, 1.0)
    out = np.zeros_like(state.amplitudes, dtype=np.complex128)
    out[filled - 2 ** (state.n_modes - 1 - mode)] = sign * state.amplitudes[filled]
    return out


def dense_covariance(state: DenseState) -> np.ndarray:
    """<c_i^dag c_j> of a fermionic dense state."""
    lowered = [_annihilate(state, m) for m in range(state.n_modes)]
    return np.array([[np.vdot(a, b) for b in lowered] for a in lowered])


def dense_rdm(state: DenseState, keep: ModeMask) -> DenseDensity:
    """Reduced density matrix of the modes in ``keep`` (in mask order)."""
    keep.check_range(state.n_modes)
    rest = [m for m in range(state.n_modes) if m not in set(keep.indices)]
    amps = _permute_modes(state.amplitudes, state.n_modes, list(keep.indices) + rest, state.fermionic)
    M = amps.reshape(2 ** len(keep), -1)
    rho = M @ M.conj().T
    return DenseDensity(len(keep), 0.5 * (rho + rho.conj().T), state.statistics)


def _density_spectrum(rho: DenseDensity) -> tuple[np.ndarray, np.ndarray]:
    p, W = scipy.linalg.eigh(rho.matrix)
    if p[0] < -1e-10:
        raise NumericError(f"Density matrix has negative eigenvalue {p[0]:.3e}")
    return np.where(p < EIGEN_FLOOR, 0.0, p), W


def dense_entropy(rho: DenseDensity) -> float:
    p, _ = _density_spectrum(rho)
    return _spectrum_entropy(p)


def _purification_signs(n_modes: int) -> np.ndarray:
    """(-1)^{sum_{k<l} (1 - m_k) m_l} for every occupation pattern m."""
    occ = occupation_table(n_modes).astype(np.int64)
    empty_before = np.arange(n_modes)[None, :] - (np.cumsum(occ, axis=1) - occ)
    return np.where(np.sum(occ * empty_before, axis=1) % 2, -1.0, 1.0)


def dense_reflected_entropy(rho_AB: DenseDensity, split: Union[int, ModeMask]) -> float:
    """
    Entropy of AA' in the canonical purification of rho_AB.

    ``split`` is either the number of leading A modes or the positions of A.
    Fermionic statistics map the bra |m> to the auxiliary pattern with every
    occupation flipped, weighted by the sign above, auxiliary modes after the
    originals; qubit statistics use the plain vectorization.
    """
    n = rho_AB.n_modes
    if n > MAX_DENSITY_MODES:
        raise OracleCapacityError(f"Reflected entropy is capped at {MAX_DENSITY_MODES} modes, got {n}")
    A = ModeMask(tuple(range(split))) if isinstance(split, int) else split
    A.check_range(n)
    p, W = _density_spectrum(rho_AB)
    root = (W * np.sqrt(p)) @ W.conj().T
    fermionic = rho_AB.statistics is Statistics.FERMIONIC
    if fermionic:
        root = (root * _purification_signs(n)[None, :])[:, ::-1]
    B = [m for m in range(n) if m not in set(A.indices)]
    order = list(A.indices) + [n + m for m in A.indices] + B + [n + m for m in B]
    vector = _permute_modes(root.reshape(-1), 2 * n, order, fermionic)
    return _schmidt_entropy(vector, 2 * len(A))


def dense_gap_components(state: DenseState, A: ModeMask, B: ModeMask) -> GapComponents:
    require_disjoint(A, B)
    AB = A.union(B)
    rho_ab = dense_rdm(state, AB)
    rest = ModeMask(tuple(m for m in range(state.n_modes) if m not in set(AB.indices)))
    # the global state is pure, so S(AB) = S(rest)
    s_ab = dense_entropy(dense_rdm(state, rest)) if len(rest) < len(AB) else dense_entropy(rho_ab)
    mi = dense_entropy(dense_rdm(state, A)) + dense_entropy(dense_rdm(state, B)) - s_ab
    s_r = dense_reflected_entropy(rho_ab, AB.positions_of(A))
    return GapComponents(s_r, mi, s_r - mi)


def dense_markov_gap(state: DenseState, A: ModeMask, B: ModeMask) -> float:
    return dense_gap_components(state, A, B).markov_gap

"""
Qubit reference states with a known Markov gap.

Regions are built from "legs": a leg is a two-qubit (or wider) factor shared
between the right side of one region and the left side of the next.
"""
import itertools
import math
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from find_markov_gap.gaussian import ModeMask, as_covariance, spectrum
from find_markov_gap.oracle.dense import DenseState, Statistics, slater_statevector
from find_markov_gap.utils.errors import OracleCapacityError

LEG_QUBITS = 3


class TripartiteState(NamedTuple):
    state: DenseState
    A: ModeMask
    B: ModeMask
    C: ModeMask


def _qubit_state(amplitudes: np.ndarray, n_qubits: int) -> DenseState:
    return DenseState.normalized(amplitudes.astype(np.complex128), n_qubits, Statistics.QUBIT)


def _basis_index(bits: Sequence[int]) -> int:
    return int("".join(str(int(b)) for b in bits), 2) if len(bits) else 0


def ghz_state(n_qubits: int = 3) -> DenseState:
    amps = np.zeros(2**n_qubits)
    amps[0] = amps[-1] = 1.0
    return _qubit_state(amps, n_qubits)


def w_state(n_qubits: int = 3) -> DenseState:
    amps = np.zeros(2**n_qubits)
    amps[[2**k for k in range(n_qubits)]] = 1.0
    return _qubit_state(amps, n_qubits)


def toric_bell_factor(s: int) -> np.ndarray:
    """
    |XY(s)> on the six qubits (X_R0, X_R1, X_R2, Y_L0, Y_L1, Y_L2).

    Qubit 0 on both sides carries s; qubits 1 and 2 carry q and q xor s,
    summed over q with equal weight.
    """
    if s not in (0, 1):
        raise ValueError(f"Sector label must be 0 or 1, got {s}")
    amps = np.zeros(2**6)
    for q in (0, 1):
        right = (s, q, q ^ s)
        amps[_basis_index(right + right)] += 1.0
    return amps / np.linalg.norm(amps)


def toric_sots_state() -> TripartiteState:
    """
    Reduced toric-code ground state on three regions of six qubits each.

    Region r holds its left leg (qubits 6r .. 6r+2) followed by its right leg
    (6r+3 .. 6r+5); the legs (A_R, B_L), (B_R, C_L) and (C_R, A_L) share one
    sector label s summed over {0, 1}.
    """
    n = 6 * LEG_QUBITS
    amps = np.zeros(2**n)
    for s in (0, 1):
        legs = [[(s, q, q ^ s) for q in (0, 1)] for _ in range(3)]
        for choice in itertools.product(*legs):
            bits = [0] * n
            for region in range(3):
                right = choice[region]
                left_owner = (region + 1) % 3
                bits[6 * region + 3 : 6 * region + 6] = right
                bits[6 * left_owner : 6 * left_owner + 3] = right
            amps[_basis_index(bits)] += 1.0
    masks = [ModeMask(tuple(range(6 * r, 6 * r + 6))) for r in range(3)]
    return TripartiteState(_qubit_state(amps, n), *masks)


def _bell_pair() -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, 1.0]]) / math.sqrt(2)


def triangle_state(pair_states: Optional[Sequence[np.ndarray]] = None) -> TripartiteState:
    """Three two-qubit legs around A, B, C; Bell pairs unless ``pair_states`` says otherwise."""
    return sum_of_triangles_state([1.0], [pair_states] if pair_states is not None else None)


def sum_of_triangles_state(
    weights: Sequence[float],
    pair_states: Optional[Sequence[Sequence[np.ndarray]]] = None,
) -> TripartiteState:
    """
    sum_j sqrt(w_j) |j j j> (x) |AB_j> |BC_j> |CA_j> with orthogonal sector labels.

    Every region holds ceil(log2 J) sector qubits (none for a single term), then
    its left leg qubit, then its right leg qubit. ``pair_states[j]`` lists the
    three 2x2 amplitude matrices of term j, first index on the earlier region
    of each leg (A for AB, B for BC, C for CA).
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or not len(weights) or np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("Sum-of-triangles weights must be a non-empty list of non-negative numbers")
    J = len(weights)
    sector = math.ceil(math.log2(J)) if J > 1 else 0
    per_region = sector + 2
    n = 3 * per_region
    if n > 20:
        raise OracleCapacityError(f"{J} triangle terms need {n} qubits")
    if pair_states is None:
        pair_states = [[_bell_pair()] * 3 for _ in range(J)]
    if len(pair_states) != J:
        raise ValueError(f"Expected {J} triangle terms, got {len(pair_states)}")

    amps = np.zeros(2**n, dtype=np.complex128)
    for j, (w, legs) in enumerate(zip(weights / weights.sum(), pair_states)):
        legs = [np.asarray(m, dtype=np.complex128).reshape(2, 2) for m in legs]
        legs = [m / np.linalg.norm(m) for m in legs]
        label = [int(b) for b in format(j, f"0{sector}b")] if sector else []
        for bits in itertools.product((0, 1), repeat=6):
            # bits = (A_L, A_R, B_L, B_R, C_L, C_R)
            a_l, a_r, b_l, b_r, c_l, c_r = bits
            value = legs[0][a_r, b_l] * legs[1][b_r, c_l] * legs[2][c_r, a_l]
            if value == 0:
                continue
            pattern = label + [a_l, a_r] + label + [b_l, b_r] + label + [c_l, c_r]
            amps[_basis_index(pattern)] += math.sqrt(w) * value
    masks = [ModeMask(tuple(range(r * per_region, (r + 1) * per_region))) for r in range(3)]
    return TripartiteState(_qubit_state(amps, n), *masks)


def random_triangle_legs(rng: np.random.Generator) -> list[np.ndarray]:
    """Three random normalized two-qubit leg states."""
    legs = []
    for _ in range(3):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        legs.append(m / np.linalg.norm(m))
    return legs


def gaussian_dense_state(C_AB, rng: np.random.Generator) -> DenseState:
    """
    Slater state on 2n modes whose first n modes carry the covariance ``C_AB``.

    The ancilla orbitals are rotated by a Haar-random unitary so the
    purification is generic.
    """
    C = as_covariance(C_AB)
    n = C.dim
    if 2 * n > 14:
        raise OracleCapacityError(f"A {n}-mode covariance needs {2 * n} purified modes")
    lam, U = spectrum(C)
    lam = np.clip(lam, 0.0, 1.0)
    V = unitary_group.rvs(n, random_state=rng) if n > 1 else np.eye(n)
    orbitals = np.vstack([U * np.sqrt(lam), V * np.sqrt(1 - lam)])
    return slater_statevector(orbitals)

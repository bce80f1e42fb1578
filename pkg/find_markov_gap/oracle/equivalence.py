import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from find_markov_gap.gaussian import ModeMask, entropy, gap_components, restrict
from find_markov_gap.oracle.dense import dense_entropy, dense_gap_components, dense_rdm, slater_statevector

EQUIVALENCE_TOL = 1e-6
QUANTITIES = ("entropy", "mutual_information", "reflected_entropy", "markov_gap")


@dataclass(frozen=True)
class EquivalenceRow:
    index: int
    n_modes: int
    n_orbitals: int
    A: ModeMask
    B: ModeMask
    gaussian: dict[str, float]
    dense: dict[str, float]

    @property
    def deviation(self) -> float:
        return max(abs(self.gaussian[q] - self.dense[q]) for q in QUANTITIES)


@dataclass
class EquivalenceSummary:
    rows: list[EquivalenceRow] = field(default_factory=list)
    tolerance: float = EQUIVALENCE_TOL

    @property
    def max_deviation(self) -> float:
        return max((row.deviation for row in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    @property
    def failures(self) -> list[EquivalenceRow]:
        return [row for row in self.rows if row.deviation > self.tolerance]


def random_slater_orbitals(n_modes: int, n_orbitals: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n_modes, random_state=rng)[:, :n_orbitals]


def random_bipartition(n_modes: int, rng: np.random.Generator) -> tuple[ModeMask, ModeMask]:
    """Disjoint non-empty A and B drawn from a random permutation; the rest is C."""
    order = rng.permutation(n_modes)
    n_a = int(rng.integers(1, n_modes))
    n_b = int(rng.integers(1, n_modes - n_a + 1))
    return ModeMask.from_indices(order[:n_a]), ModeMask.from_indices(order[n_a : n_a + n_b])


def compare_slater(orbitals: np.ndarray, A: ModeMask, B: ModeMask, index: int = 0) -> EquivalenceRow:
    C = orbitals @ orbitals.conj().T
    components = gap_components(C, A, B)
    state = slater_statevector(orbitals)
    dense = dense_gap_components(state, A, B)
    return EquivalenceRow(
        index,
        orbitals.shape[0],
        orbitals.shape[1],
        A,
        B,
        {
            "entropy": entropy(restrict(C, A)),
            "mutual_information": components.mutual_information,
            "reflected_entropy": components.reflected_entropy,
            "markov_gap": components.markov_gap,
        },
        {
            "entropy": dense_entropy(dense_rdm(state, A)),
            "mutual_information": dense.mutual_information,
            "reflected_entropy": dense.reflected_entropy,
            "markov_gap": dense.markov_gap,
        },
    )


def run_equivalence_suite(
    n_states: int = 50,
    seed: int = 0,
    min_modes: int = 4,
    max_modes: int = 8,
    tolerance: float = EQUIVALENCE_TOL,
) -> EquivalenceSummary:
    """Compare Gaussian and brute-force entropies on random Slater states and tripartitions."""
    if not 2 <= min_modes <= max_modes <= 14:
        raise ValueError(f"Mode range [{min_modes}, {max_modes}] must lie within [2, 14]")
    rng = np.random.default_rng(seed)
    summary = EquivalenceSummary(tolerance=tolerance)
    for index in range(n_states):
        n_modes = int(rng.integers(min_modes, max_modes + 1))
        n_orbitals = int(rng.integers(1, n_modes))
        A, B = random_bipartition(n_modes, rng)
        row = compare_slater(random_slater_orbitals(n_modes, n_orbitals, rng), A, B, index)
        summary.rows.append(row)
        if row.deviation > tolerance:
            logging.warning(
                f"State {index} ({n_modes} modes, {n_orbitals} orbitals): deviation {row.deviation:.3e}"
            )
    logging.info(f"Checked {n_states} random Slater states, max deviation {summary.max_deviation:.3e}")
    return summary

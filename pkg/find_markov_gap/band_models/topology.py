import logging
from typing import Iterable, Optional

import numpy as np

from find_markov_gap.band_models.hofstadter import BlochSolution, ModelSpec, occupations, solve_bands
from find_markov_gap.utils.errors import ModelError, NumericError

GAP_TOL = 1e-6
RESIDUE_TOL = 0.01


def _band_indices(sol: BlochSolution, band_set: Iterable[int]) -> np.ndarray:
    bands = np.unique(np.fromiter(band_set, dtype=np.int64))
    if bands.size and (bands[0] < 0 or bands[-1] >= sol.n_bands):
        raise ModelError(f"Band indices {bands.tolist()} outside [0, {sol.n_bands})")
    return bands


def _check_isolated(sol: BlochSolution, bands: np.ndarray) -> None:
    others = np.setdiff1d(np.arange(sol.n_bands), bands)
    if not bands.size or not others.size:
        return
    inside = sol.energies[..., bands][..., :, None]
    outside = sol.energies[..., others][..., None, :]
    closest = np.min(np.abs(inside - outside))
    if closest < GAP_TOL:
        raise ModelError(f"Band set {bands.tolist()} is not gapped from the rest (gap {closest:.2e})")


def berry_flux(sol: BlochSolution, band_set: Iterable[int]) -> float:
    """
    Total Berry flux / 2pi of a band set from plaquette link variables.

    The grid covers k_x in [0, k0); the state at k_x + k0 is the state at k_x with
    the plane-wave index shifted by one, which closes the torus.
    """
    bands = _band_indices(sol, band_set)
    _check_isolated(sol, bands)
    if not bands.size:
        return 0.0
    V = sol.vectors[..., bands]
    wrapped = np.roll(V[:1], -1, axis=-2)
    V_x = np.concatenate([V[1:], wrapped], axis=0)
    V_y = np.roll(V, -1, axis=1)

    def link(left: np.ndarray, right: np.ndarray) -> np.ndarray:
        overlap = np.linalg.det(np.einsum("abnl,abnm->ablm", left.conj(), right))
        return overlap / np.abs(overlap)

    U_x = link(V, V_x)
    U_y = link(V, V_y)
    plaquette = U_x * np.roll(U_y, -1, axis=0) * np.roll(U_x, -1, axis=1).conj() * U_y.conj()
    return float(np.sum(np.angle(plaquette)) / (2 * np.pi))


def chern_number(sol: BlochSolution, band_set: Iterable[int]) -> int:
    flux = berry_flux(sol, band_set)
    value = int(np.rint(flux))
    residue = abs(flux - value)
    logging.debug(f"Chern number {value} (rounding residue {residue:.2e})")
    if residue >= RESIDUE_TOL:
        raise NumericError(f"Berry flux {flux:.4f} is not close to an integer; refine the momentum grid")
    return value


def diophantine_chern(p: int, q: int, r: int) -> Optional[int]:
    """
    Hall integer of the lowest r Hofstadter bands: the t with r = q*s + p*t, |t| <= q/2.
    Returns None when the choice is ambiguous (gap closing at half filling for even q).
    """
    if r % q == 0:
        return 0
    solutions = [t for t in range(-(q // 2), q // 2 + 1) if (r - p * t) % q == 0]
    if len(solutions) != 1:
        return None
    return solutions[0]


def filled_band_count(spec: ModelSpec, sol: BlochSolution) -> int:
    counts = np.unique(occupations(spec, sol).sum(axis=-1))
    if len(counts) != 1:
        raise ModelError(
            f"Chemical potential mu={spec.mu} crosses a band: occupied band count varies {counts.tolist()}"
        )
    return int(counts[0])


def band_gap(sol: BlochSolution, r: int) -> float:
    """Gap between the lowest r bands and the rest (inf when nothing or everything is filled)."""
    if r <= 0 or r >= sol.n_bands:
        return float("inf")
    return float(np.min(sol.energies[..., r]) - np.max(sol.energies[..., r - 1]))


def layer_chern_numbers(spec: ModelSpec, grid_n: int) -> list[int]:
    """Chern number of the filled bands of every layer."""
    numbers = []
    for index in range(spec.n_layers):
        layer = spec.layer(index)
        sol = solve_bands(layer, grid_n)
        numbers.append(chern_number(sol, range(filled_band_count(layer, sol))))
    return numbers

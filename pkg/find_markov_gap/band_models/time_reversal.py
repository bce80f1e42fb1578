from typing import Optional

import numpy as np

from find_markov_gap.gaussian import CovarianceMatrix, ModeMask, as_covariance
from find_markov_gap.geometry import Lattice
from find_markov_gap.utils.errors import ModelError


def tr_operator(lat: Lattice, mask: Optional[ModeMask] = None) -> np.ndarray:
    """
    Single-particle part S of the antiunitary T = S K exchanging the two layers:
    T c_up T^-1 = c_down, T c_down T^-1 = -c_up. With ``mask`` only the rows and
    columns of those modes are built.
    """
    if lat.layers != 2:
        raise ModelError(f"Time reversal needs exactly two layers, got {lat.layers}")
    modes = mask if mask is not None else ModeMask.full(lat.n_modes)
    modes.check_range(lat.n_modes)
    idx = modes.array
    position = {int(m): i for i, m in enumerate(idx)}
    S = np.zeros((len(idx), len(idx)))
    for i, m in enumerate(idx):
        up = m < lat.n_sites
        partner = m + lat.n_sites if up else m - lat.n_sites
        j = position.get(int(partner))
        if j is not None:
            # column of c_up maps to +c_down, column of c_down to -c_up
            S[j, i] = 1.0 if up else -1.0
    return S


def tr_residual(C, S: np.ndarray) -> float:
    """max |S conj(C) S^-1 - C|; zero for a time-reversal invariant state."""
    C = as_covariance(C).entries
    return float(np.max(np.abs(S @ C.conj() @ S.conj().T - C)))


def is_tr_closed(S: np.ndarray, tol: float = 1e-12) -> bool:
    """True when the restricted S is unitary, i.e. the mask is closed under layer exchange."""
    return bool(np.max(np.abs(S @ S.conj().T - np.eye(len(S))), initial=0.0) <= tol)

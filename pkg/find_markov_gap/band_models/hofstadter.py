"""
Hofstadter model on a periodic square lattice and its ground-state covariance.

The magnetic Bloch matrix couples the plane waves k_x + n*k0 (n = 0..q-1,
k0 = 2*pi/q) at fixed k_y. In real space it is the lattice Hamiltonian

    H = -t sum [c^dag_{x,y} c_{x+1,y} + e^{-iBx} c^dag_{x,y} c_{x,y+1} + h.c.] + mu sum n_{x,y}

with flux B = 2*pi*p/q per plaquette.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from find_markov_gap.gaussian import CovarianceMatrix, ModeMask
from find_markov_gap.geometry import Lattice
from find_markov_gap.utils.errors import ModelError, NumericError


@dataclass(frozen=True)
class LayerSpec:
    p_sign: int = 1
    mu: float = 0.0

    def __post_init__(self) -> None:
        if self.p_sign not in (1, -1):
            raise ModelError(f"Layer flux sign must be +1 or -1, got {self.p_sign}")


@dataclass(frozen=True)
class ModelSpec:
    p: int
    q: int
    t: float = 1.0
    mu: float = 0.0
    filled_bands: Optional[int] = None
    layers: tuple[LayerSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ModelError(f"Flux denominator must be >= 1, got {self.q}")
        if math.gcd(abs(self.p), self.q) != 1:
            raise ModelError(f"Flux {self.p}/{self.q} is not in lowest terms")
        if self.filled_bands is not None and not 0 <= self.filled_bands <= self.q:
            raise ModelError(f"filled_bands={self.filled_bands} outside [0, {self.q}]")
        object.__setattr__(
            self, "layers", tuple(l if isinstance(l, LayerSpec) else LayerSpec(*l) for l in self.layers)
        )

    @property
    def k0(self) -> float:
        return 2 * np.pi / self.q

    @property
    def flux(self) -> float:
        return 2 * np.pi * self.p / self.q

    @property
    def layer_specs(self) -> tuple[LayerSpec, ...]:
        return self.layers or (LayerSpec(1, self.mu),)

    @property
    def n_layers(self) -> int:
        return len(self.layer_specs)

    def layer(self, index: int) -> "ModelSpec":
        """Single-layer model of layer ``index`` (flux sign and mu applied)."""
        spec = self.layer_specs[index]
        return ModelSpec(self.p * spec.p_sign, self.q, self.t, spec.mu, self.filled_bands)

    def single_layer(self) -> "ModelSpec":
        if self.n_layers != 1:
            raise ModelError(f"Operation needs a single-layer model, got {self.n_layers} layers")
        return self.layer(0)


@dataclass(frozen=True)
class BlochSolution:
    """Bands on the grid k_x in [0, k0), k_y in [0, 2*pi), energies ascending per k."""

    p: int
    q: int
    kx: np.ndarray
    ky: np.ndarray
    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    @property
    def k0(self) -> float:
        return 2 * np.pi / self.q

    @property
    def n_bands(self) -> int:
        return self.q


def bloch_hamiltonian(spec: ModelSpec, kx, ky) -> np.ndarray:
    """q x q Bloch matrix; kx and ky may be broadcastable arrays (result shape (..., q, q))."""
    spec = spec.single_layer()
    kx, ky = np.broadcast_arrays(np.asarray(kx, dtype=np.float64), np.asarray(ky, dtype=np.float64))
    q, p, t = spec.q, spec.p, spec.t
    h = np.zeros(kx.shape + (q, q), dtype=np.complex128)
    forward = -t * np.exp(1j * ky)
    for n in range(q):
        h[..., n, n] += -2 * t * np.cos(kx + n * spec.k0) + spec.mu
        h[..., n, (n + p) % q] += forward
        h[..., n, (n - p) % q] += forward.conj()
    return h


def solve_bands(spec: ModelSpec, grid_n: int, grid_ny: Optional[int] = None) -> BlochSolution:
    """Diagonalize the Bloch matrix on a grid_n x grid_ny momentum grid (grid_ny defaults to grid_n)."""
    spec = spec.single_layer()
    grid_ny = grid_n if grid_ny is None else grid_ny
    if grid_n < 1 or grid_ny < 1:
        raise ModelError(f"Momentum grid must be positive, got {grid_n}x{grid_ny}")
    kx = spec.k0 * np.arange(grid_n) / grid_n
    ky = 2 * np.pi * np.arange(grid_ny) / grid_ny
    h = bloch_hamiltonian(spec, kx[:, None], ky[None, :])
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Bloch eigensolver failed: {e}") from e
    return BlochSolution(spec.p, spec.q, kx, ky, energies, vectors)


def solve_lattice_bands(spec: ModelSpec, lat: Lattice) -> BlochSolution:
    """Bands on exactly the momentum set of the finite periodic lattice."""
    spec = spec.single_layer()
    if lat.width % spec.q:
        raise ModelError(f"Lattice width {lat.width} is not divisible by q={spec.q}")
    return solve_bands(spec, lat.width // spec.q, lat.height)


def occupations(spec: ModelSpec, sol: BlochSolution) -> np.ndarray:
    """Boolean occupation per (k, band): filled_bands if set, else theta(-energy)."""
    if spec.filled_bands is not None:
        occ = np.zeros(sol.energies.shape, dtype=bool)
        occ[..., : spec.filled_bands] = True
        return occ
    return sol.energies < 0


def _translation_kernels(spec: ModelSpec, lat: Lattice) -> np.ndarray:
    """
    kernels[r, dx, dy] = <c^dag_{x,y} c_{x',y'}> with r = x' mod q,
    dx = x - x' mod W, dy = y - y' mod H, for one layer.
    """
    sol = solve_lattice_bands(spec, lat)
    occ = occupations(spec, sol)
    V = sol.vectors
    # <c^dag_{k,n} c_{k,m}> in the plane-wave basis
    P = np.einsum("abnl,abml,abl->abnm", V.conj(), V, occ)
    q, n_kx = spec.q, lat.width // spec.q
    n = np.arange(q)
    kernels = np.empty((q, lat.width, lat.height), dtype=np.complex128)
    for r in range(q):
        phase = np.exp(-1j * spec.k0 * np.subtract.outer(n, n) * r)
        F = np.einsum("abnm,nm->nab", P, phase).reshape(q * n_kx, lat.height)
        kernels[r] = np.fft.fft2(F) / lat.n_sites
    return kernels


def correlation_length(spec: ModelSpec, lat: Lattice, floor: float = 1e-12) -> float:
    """
    Decay length xi of |<c^dag_i c_j>| ~ exp(-|i - j| / xi), largest over layers.

    Distances use the minimum image on the torus, up to half the shorter side.
    The fit runs over the largest kernel entry at each integer distance and
    drops entries below ``floor``.
    """
    dx = np.arange(lat.width)
    dy = np.arange(lat.height)
    dx = np.minimum(dx, lat.width - dx)[:, None]
    dy = np.minimum(dy, lat.height - dy)[None, :]
    shell = np.rint(np.hypot(dx, dy)).astype(int)
    lengths = []
    for index in range(spec.n_layers):
        envelope = np.abs(_translation_kernels(spec.layer(index), lat)).max(axis=0)
        d = np.arange(1, min(lat.width, lat.height) // 2 + 1)
        peak = np.array([envelope[shell == r].max() for r in d])
        keep = peak > floor
        if keep.sum() < 2:
            raise NumericError(f"Layer {index}: fewer than two correlations above {floor:g}")
        slope, _ = np.polyfit(d[keep], np.log(peak[keep]), 1)
        if slope >= 0:
            raise ModelError(f"Layer {index}: correlations do not decay (slope {slope:.3g}); is the filling gapped?")
        lengths.append(-1.0 / slope)
    logging.debug(f"Correlation lengths per layer: {lengths}")
    return max(lengths)


def covariance_real_space(
    spec: ModelSpec, lat: Lattice, mask: Optional[ModeMask] = None
) -> CovarianceMatrix:
    """
    Ground-state covariance of the (possibly layered) model on ``lat``.

    Only the principal submatrix on ``mask`` is assembled when a mask is given;
    the cost is q FFTs of the lattice plus one gather per matrix entry.
    """
    if lat.layers != spec.n_layers:
        raise ModelError(f"Lattice has {lat.layers} layers but the model has {spec.n_layers}")
    modes = mask if mask is not None else ModeMask.full(lat.n_modes)
    modes.check_range(lat.n_modes)
    x, y, layer = lat.site_of(modes.array)
    C = np.zeros((len(modes), len(modes)), dtype=np.complex128)
    for index in range(spec.n_layers):
        sel = np.flatnonzero(layer == index)
        if not len(sel):
            continue
        layer_spec = spec.layer(index)
        kernels = _translation_kernels(layer_spec, lat)
        xs, ys = x[sel], y[sel]
        dx = np.subtract.outer(xs, xs) % lat.width
        dy = np.subtract.outer(ys, ys) % lat.height
        r = np.broadcast_to(xs % layer_spec.q, dx.shape)
        C[np.ix_(sel, sel)] = kernels[r, dx, dy]
    logging.debug(f"Covariance assembled on {len(modes)} of {lat.n_modes} modes")
    return CovarianceMatrix.hermitized(C)


def real_space_hamiltonian(spec: ModelSpec, lat: Lattice) -> np.ndarray:
    """Dense single-particle Hamiltonian of one layer on the periodic lattice."""
    spec = spec.single_layer()
    x, y = lat.site_coordinates()
    here = np.arange(lat.n_sites)
    right = y * lat.width + (x + 1) % lat.width
    up = ((y + 1) % lat.height) * lat.width + x
    H = np.zeros((lat.n_sites, lat.n_sites), dtype=np.complex128)
    np.add.at(H, (here, here), spec.mu)
    np.add.at(H, (here, right), -spec.t)
    np.add.at(H, (right, here), -spec.t)
    y_hop = -spec.t * np.exp(-1j * spec.flux * x)
    np.add.at(H, (here, up), y_hop)
    np.add.at(H, (up, here), y_hop.conj())
    return H


def direct_covariance(spec: ModelSpec, lat: Lattice) -> CovarianceMatrix:
    """Ground-state covariance from diagonalizing the full real-space Hamiltonian."""
    spec = spec.single_layer()
    energies, vecs = scipy.linalg.eigh(real_space_hamiltonian(spec, lat))
    if spec.filled_bands is not None:
        occupied = vecs[:, : spec.filled_bands * lat.n_sites // spec.q]
    else:
        occupied = vecs[:, energies < 0]
    return CovarianceMatrix.hermitized((occupied @ occupied.conj().T).conj())


def stack(covariances: Sequence[CovarianceMatrix]) -> CovarianceMatrix:
    """Block-diagonal covariance over the layer index (layer-major mode order)."""
    if not covariances:
        raise ModelError("Nothing to stack")
    dims = {c.dim for c in covariances}
    if len(dims) != 1:
        raise ModelError(f"Layers have mismatched dimensions {sorted(dims)}")
    if len(covariances) == 1:
        return covariances[0]
    return CovarianceMatrix(scipy.linalg.block_diag(*(c.entries for c in covariances)))

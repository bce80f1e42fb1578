from dataclasses import dataclass

import numpy as np

from find_markov_gap.gaussian import ModeMask
from find_markov_gap.utils.errors import GeometryError


@dataclass(frozen=True)
class Lattice:
    """
    Periodic square lattice with ``layers`` fermion modes per site.

    Modes are layer-major: mode_of(x, y, layer) = layer * width * height + y * width + x.
    """

    width: int
    height: int
    layers: int = 1

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1 or self.layers < 1:
            raise GeometryError(
                f"Lattice dimensions must be positive, got {self.width}x{self.height}x{self.layers}"
            )

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    @property
    def n_modes(self) -> int:
        return self.n_sites * self.layers

    def mode_of(self, x, y, layer=0):
        return layer * self.n_sites + y * self.width + x

    def site_of(self, mode):
        """Inverse of mode_of: returns (x, y, layer)."""
        layer, site = np.divmod(mode, self.n_sites)
        y, x = np.divmod(site, self.width)
        return x, y, layer

    def site_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Planar coordinates of every site, indexed by y * width + x."""
        y, x = np.divmod(np.arange(self.n_sites), self.width)
        return x, y

    def modes_of_sites(self, sites) -> ModeMask:
        """All layers of the given site indices."""
        sites = np.asarray(sites, dtype=np.int64)
        return ModeMask.from_indices(
            np.concatenate([sites + layer * self.n_sites for layer in range(self.layers)])
        )

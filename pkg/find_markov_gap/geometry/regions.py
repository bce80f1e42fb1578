import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from find_markov_gap.gaussian import ModeMask
from find_markov_gap.geometry.lattice import Lattice
from find_markov_gap.utils.errors import GeometryError

REGION_A, REGION_B, REGION_C = 0, 1, 2


class SmootherShape(str, Enum):
    TWO_CIRCLES = "two_circles"
    JOINT = "joint"
    STRIP = "strip"


@dataclass(frozen=True)
class Tripartition:
    """
    Two edge-adjacent squares A (L_A x L_A) and B (L_B x L_B) sharing the
    bottom row, with C the complement. N and S are the top and bottom ends of
    the shared edge, at half-integer coordinates.
    """

    lattice: Lattice
    L_A: int
    L_B: int
    anchor: tuple[int, int]
    region_of: np.ndarray = field(repr=False)
    N: tuple[float, float]
    S: tuple[float, float]

    def mask(self, region: int) -> ModeMask:
        return ModeMask(tuple(np.flatnonzero(self.region_of == region).tolist()))

    @property
    def a_mask(self) -> ModeMask:
        return self.mask(REGION_A)

    @property
    def b_mask(self) -> ModeMask:
        return self.mask(REGION_B)

    @property
    def c_mask(self) -> ModeMask:
        return self.mask(REGION_C)

    @property
    def interface_length(self) -> int:
        return min(self.L_A, self.L_B)


@dataclass(frozen=True)
class SmootherSupport:
    shape: SmootherShape
    R: int
    masks: tuple[ModeMask, ...]
    names: tuple[str, ...]

    @property
    def union(self) -> ModeMask:
        if not self.masks:
            return ModeMask()
        return self.masks[0].union(*self.masks[1:])

    @property
    def is_empty(self) -> bool:
        return all(len(m) == 0 for m in self.masks)


def default_anchor(lat: Lattice, L_A: int, L_B: int) -> tuple[int, int]:
    """Anchor that centres the A-B block on the lattice."""
    return (lat.width - (L_A + L_B)) // 2, (lat.height - max(L_A, L_B)) // 2


def build_tripartition(
    lat: Lattice,
    L_A: int,
    L_B: int,
    anchor: Optional[tuple[int, int]] = None,
    margin_min: int = 0,
) -> Tripartition:
    if L_A < 1 or L_B < 1:
        raise GeometryError(f"Block sizes must be positive, got L_A={L_A}, L_B={L_B}")
    x0, y0 = anchor if anchor is not None else default_anchor(lat, L_A, L_B)
    x_end, y_end = x0 + L_A + L_B, y0 + max(L_A, L_B)
    margins = (x0, y0, lat.width - x_end, lat.height - y_end)
    if min(margins) < 0:
        raise GeometryError(
            f"Blocks L_A={L_A}, L_B={L_B} at {(x0, y0)} do not fit in a {lat.width}x{lat.height} lattice"
        )
    if min(margins) < margin_min:
        raise GeometryError(f"Margin {min(margins)} to the lattice edge is below the minimum {margin_min}")

    x, y = lat.site_coordinates()
    in_a = (x >= x0) & (x < x0 + L_A) & (y >= y0) & (y < y0 + L_A)
    in_b = (x >= x0 + L_A) & (x < x_end) & (y >= y0) & (y < y0 + L_B)
    if np.any(in_a & in_b):
        raise GeometryError("Blocks A and B overlap")
    site_region = np.full(lat.n_sites, REGION_C, dtype=np.int8)
    site_region[in_a] = REGION_A
    site_region[in_b] = REGION_B
    region_of = np.tile(site_region, lat.layers)
    region_of.setflags(write=False)

    edge_x = x0 + L_A - 0.5
    N = (edge_x, y0 + min(L_A, L_B) - 0.5)
    S = (edge_x, y0 - 0.5)
    logging.debug(f"Tripartition: |A|={in_a.sum()}, |B|={in_b.sum()} sites, N={N}, S={S}")
    return Tripartition(lat, L_A, L_B, (x0, y0), region_of, N, S)


def _disk_sites(lat: Lattice, center: tuple[float, float], R: int) -> np.ndarray:
    x, y = lat.site_coordinates()
    return np.flatnonzero((x - center[0]) ** 2 + (y - center[1]) ** 2 <= R**2)


def _strip_sites(lat: Lattice, tp: Tripartition, R: int) -> np.ndarray:
    x, y = lat.site_coordinates()
    (nx, ny), (sx, sy) = tp.N, tp.S
    seg = np.array([nx - sx, ny - sy])
    length = np.hypot(*seg)
    dx, dy = x - sx, y - sy
    along = (dx * seg[0] + dy * seg[1]) / length
    across = np.abs(dx * seg[1] - dy * seg[0]) / length
    return np.flatnonzero((along >= 0) & (along <= length) & (across <= R))


def smoother_support(tp: Tripartition, lat: Lattice, shape, R: int) -> SmootherSupport:
    shape = SmootherShape(shape)
    if R < 0:
        raise GeometryError(f"Smoother radius must be non-negative, got {R}")
    if R == 0:
        count = 2 if shape is SmootherShape.TWO_CIRCLES else 1
        names = ("N", "S") if count == 2 else (shape.value,)
        return SmootherSupport(shape, 0, tuple(ModeMask() for _ in range(count)), names)

    if shape is SmootherShape.STRIP:
        masks = (lat.modes_of_sites(_strip_sites(lat, tp, R)),)
        names = ("strip",)
    else:
        north = lat.modes_of_sites(_disk_sites(lat, tp.N, R))
        south = lat.modes_of_sites(_disk_sites(lat, tp.S, R))
        if shape is SmootherShape.TWO_CIRCLES:
            if not north.isdisjoint(south):
                raise GeometryError(
                    f"Circles of radius {R} around N and S overlap (interface length {tp.interface_length})"
                )
            masks, names = (north, south), ("N", "S")
        else:
            masks, names = (north.union(south),), ("NS",)
    logging.debug(f"Smoother support {shape.value} R={R}: sizes {[len(m) for m in masks]}")
    return SmootherSupport(shape, R, masks, names)

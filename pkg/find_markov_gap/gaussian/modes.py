from dataclasses import dataclass
from typing import Iterable

import numpy as np

from find_markov_gap.utils.errors import MaskError


@dataclass(frozen=True)
class ModeMask:
    """Strictly increasing tuple of mode indices selecting a principal submatrix."""

    indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise MaskError(f"Negative mode index in mask: {min(idx)}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise MaskError("Mask indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "ModeMask":
        """Build a mask from any iterable, sorting and dropping duplicates."""
        return cls(tuple(np.unique(np.fromiter(indices, dtype=np.int64)).tolist()))

    @classmethod
    def full(cls, dim: int) -> "ModeMask":
        return cls(tuple(range(dim)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, mode: object) -> bool:
        return mode in set(self.indices)

    def union(self, *others: "ModeMask") -> "ModeMask":
        merged = [self.array, *(o.array for o in others)]
        return ModeMask.from_indices(np.concatenate(merged))

    def isdisjoint(self, other: "ModeMask") -> bool:
        return not set(self.indices) & set(other.indices)

    def issubset(self, other: "ModeMask") -> bool:
        return set(self.indices) <= set(other.indices)

    def shifted(self, offset: int) -> "ModeMask":
        return ModeMask(tuple(i + offset for i in self.indices))

    def positions_of(self, sub: "ModeMask") -> "ModeMask":
        """Relabel ``sub`` into positions inside this mask (``sub`` must be a subset)."""
        if not sub.issubset(self):
            missing = sorted(set(sub.indices) - set(self.indices))[:5]
            raise MaskError(f"Modes {missing} are not part of the enclosing mask")
        return ModeMask(tuple(np.searchsorted(self.array, sub.array).tolist()))

    def check_range(self, dim: int) -> None:
        if self.indices and self.indices[-1] >= dim:
            raise MaskError(f"Mode index {self.indices[-1]} out of range for dimension {dim}")


def require_disjoint(a: ModeMask, b: ModeMask) -> None:
    if not a.isdisjoint(b):
        raise MaskError("Masks A and B overlap")

from find_markov_gap.gaussian.covariance import restrict
from find_markov_gap.geometry.lattice import Lattice
from find_markov_gap.geometry.regions import (
    REGION_A,
    REGION_B,
    REGION_C,
    SmootherShape,
    SmootherSupport,
    Tripartition,
    build_tripartition,
    default_anchor,
    smoother_support,
)

__all__ = [
    "restrict",
    "Lattice",
    "REGION_A",
    "REGION_B",
    "REGION_C",
    "SmootherShape",
    "SmootherSupport",
    "Tripartition",
    "build_tripartition",
    "default_anchor",
    "smoother_support",
]

"""Random graph states from POVM-measured AKLT states on the honeycomb lattice."""

from .domains import (
    DomainDecomposition,
    GraphState,
    build_graph,
    label_domains,
    log2_weight,
)
from .kernels import BACKEND
from .lattice import Lattice, build_lattice, build_patch, named_patch, rectangle_sites

__all__ = [
    "BACKEND",
    "DomainDecomposition",
    "GraphState",
    "Lattice",
    "build_graph",
    "build_lattice",
    "build_patch",
    "label_domains",
    "log2_weight",
    "named_patch",
    "rectangle_sites",
]

__version__ = "0.1.0"

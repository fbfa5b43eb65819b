"""Quadratically convergent refinement of breadth-one multiple roots."""

from .errors import (
    BreadthError,
    ConvergenceError,
    DegenerateError,
    DimensionError,
    NoStabilization,
    RankError,
    SingrootError,
)
from .noether import DiffOp, NoetherBasis, noether_basis
from .poly import Poly, PolySystem, compose_affine, compose_linear
from .refiner import RefinerConfig, RefinementTrace, refine, sweep, tolerance_at_root
from .systems import ParseError, SystemFile, load_system, parse_system

__all__ = [
    "BreadthError",
    "ConvergenceError",
    "DegenerateError",
    "DiffOp",
    "DimensionError",
    "NoStabilization",
    "NoetherBasis",
    "ParseError",
    "Poly",
    "PolySystem",
    "RankError",
    "RefinementTrace",
    "RefinerConfig",
    "SingrootError",
    "SystemFile",
    "compose_affine",
    "compose_linear",
    "load_system",
    "noether_basis",
    "parse_system",
    "refine",
    "sweep",
    "tolerance_at_root",
]

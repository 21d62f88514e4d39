"""Deterministic compressed sensing matrices from multiplicative character sequences."""

__version__ = "0.1.0"

from .charseq import Family, SymbolSequence, modulate, power_residue_sequence, sidelnikov_sequence
from .galois import FieldContext, build_field, discrete_log, find_primitive_root
from .sensing import (
    ColumnIndex,
    SensingMatrix,
    build_gaussian_matrix,
    build_matrix,
    build_partial_fourier_matrix,
    build_power_residue_matrix,
    build_sidelnikov_matrix,
    column,
)

__all__ = [
    "ColumnIndex",
    "Family",
    "FieldContext",
    "SensingMatrix",
    "SymbolSequence",
    "build_field",
    "build_gaussian_matrix",
    "build_matrix",
    "build_partial_fourier_matrix",
    "build_power_residue_matrix",
    "build_sidelnikov_matrix",
    "column",
    "discrete_log",
    "find_primitive_root",
    "modulate",
    "power_residue_sequence",
    "sidelnikov_sequence",
]

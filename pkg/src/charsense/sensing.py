"""Deterministic character-sequence sensing matrices and random baselines.

A deterministic matrix is stored as a K x N integer exponent table mod M.
Column ``n`` corresponds to shift ``b = n mod K`` and multiplier
``c = n // K + 1`` of the base sequence, and its entries are
``omega_M ** (c * seq[(k + b) mod K]) / sqrt(K)``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, TextIO

import numpy as np

from .charseq import (
    Family,
    SymbolSequence,
    modulate,
    power_residue_sequence,
    roots_of_unity,
    sidelnikov_sequence,
)
from .errors import FamilyMismatch, FormatError, RangeError
from .galois import build_field


class ColumnIndex(NamedTuple):
    b: int
    c: int

    @classmethod
    def from_column(cls, n: int, K: int) -> "ColumnIndex":
        return cls(n % K, n // K + 1)

    def to_column(self, K: int) -> int:
        return (self.c - 1) * K + self.b


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    K: int
    N: int
    M: int
    family: Family
    exponents: np.ndarray | None = None
    sequence: SymbolSequence | None = None
    provenance: dict = field(default_factory=dict)
    _dense: np.ndarray | None = field(default=None, repr=False)

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.K)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.K, self.N)

    @cached_property
    def dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        a = self.scale * roots_of_unity(self.M)[self.exponents]
        a.setflags(write=False)
        return a

    @cached_property
    def adjoint(self) -> np.ndarray:
        """Contiguous conjugate transpose, for repeated correlation."""
        return np.ascontiguousarray(self.dense.conj().T)


def column_exponents(seq: SymbolSequence, N: int) -> np.ndarray:
    K, M = seq.period, seq.M
    n = np.arange(N)
    b = n % K
    c = n // K + 1
    rows = (np.arange(K)[:, None] + b[None, :]) % K
    return (c[None, :] * seq.symbols[rows]) % M


def _from_sequence(seq: SymbolSequence, provenance: dict) -> SensingMatrix:
    K = seq.period
    N = (seq.M - 1) * K
    exps = column_exponents(seq, N)
    exps.setflags(write=False)
    return SensingMatrix(K, N, seq.M, seq.family, exps, seq, provenance)


def _field_provenance(ctx) -> dict:
    return {
        "p": ctx.p,
        "m": ctx.m,
        "alpha": ctx.alpha,
        "modulus_poly": list(ctx.modulus_poly),
    }


def build_power_residue_matrix(p: int, M: int, ctx=None) -> SensingMatrix:
    """p x (M-1)p matrix from the M-ary power residue sequence of period p.

    ``ctx`` overrides the default field (e.g. a different primitive root).
    """
    ctx = ctx if ctx is not None else build_field(p, 1)
    seq = power_residue_sequence(ctx, M)
    return _from_sequence(seq, _field_provenance(ctx))


def build_sidelnikov_matrix(p: int, m: int, M: int, ctx=None) -> SensingMatrix:
    ctx = ctx if ctx is not None else build_field(p, m)
    seq = sidelnikov_sequence(ctx, M)
    return _from_sequence(seq, _field_provenance(ctx))


def build_matrix(family: Family | str, p: int, M: int, m: int = 1) -> SensingMatrix:
    family = Family(family)
    if family is Family.POWER_RESIDUE:
        if m != 1:
            raise FamilyMismatch("power residue matrices are defined over prime fields (m=1)")
        return build_power_residue_matrix(p, M)
    if family is Family.SIDELNIKOV:
        return build_sidelnikov_matrix(p, m, M)
    raise FamilyMismatch(f"{family.value} is not a deterministic family")


def column(mat: SensingMatrix, n: int) -> np.ndarray:
    """Column ``n`` regenerated from the single base sequence."""
    if mat.sequence is None:
        raise FamilyMismatch("column reconstruction needs a deterministic family")
    if not 0 <= n < mat.N:
        raise RangeError(f"column {n} outside [0, {mat.N})")
    b, c = ColumnIndex.from_column(n, mat.K)
    return mat.scale * modulate(mat.sequence, c, b)


def build_gaussian_matrix(K: int, num_cols: int, seed) -> SensingMatrix:
    """Real N(0, 1/K) entries, columns rescaled to unit norm."""
    if K < 1 or num_cols < 1:
        raise RangeError("dimensions must be positive")
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0 / math.sqrt(K), size=(K, num_cols))
    a /= np.linalg.norm(a, axis=0)
    a.setflags(write=False)
    prov = {"seed": seed if isinstance(seed, (int, type(None))) else None}
    return SensingMatrix(K, num_cols, 0, Family.GAUSSIAN, provenance=prov, _dense=a)


def build_partial_fourier_matrix(K: int, N: int, seed) -> SensingMatrix:
    """K rows of the N-point DFT, drawn uniformly without replacement.

    Rows are scaled by 1/sqrt(K) so every column has unit norm.
    """
    if K > N:
        raise RangeError(f"cannot select K={K} rows from an {N}-point DFT")
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(N, size=K, replace=False))
    phase = (rows[:, None] * np.arange(N)[None, :]) % N
    a = np.exp(-2j * np.pi * phase / N) / math.sqrt(K)
    a.setflags(write=False)
    prov = {"seed": seed if isinstance(seed, (int, type(None))) else None, "rows": rows.tolist()}
    return SensingMatrix(K, N, 0, Family.PARTIAL_FOURIER, provenance=prov, _dense=a)


# -- export / import ----------------------------------------------------------

def _header(mat: SensingMatrix) -> dict:
    prov = mat.provenance
    return {
        "family": mat.family.value,
        "p": prov.get("p"),
        "m": prov.get("m"),
        "M": mat.M,
        "K": mat.K,
        "N": mat.N,
        "alpha": prov.get("alpha"),
        "modulus_poly": prov.get("modulus_poly"),
        "seed": prov.get("seed"),
    }


def export_matrix(mat: SensingMatrix, fh: TextIO) -> None:
    """JSON header line, then one CSV line per row.

    Deterministic families write integer exponents; baselines write
    interleaved real,imag pairs with 17 significant digits.
    """
    fh.write(json.dumps(_header(mat), sort_keys=True) + "\n")
    if mat.family.deterministic:
        for row in mat.exponents:
            fh.write(",".join(map(str, row.tolist())) + "\n")
    else:
        for row in mat.dense:
            vals = np.empty(2 * len(row))
            vals[0::2] = row.real
            vals[1::2] = row.imag if np.iscomplexobj(row) else 0.0
            fh.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def export_matrix_text(mat: SensingMatrix) -> str:
    buf = io.StringIO()
    export_matrix(mat, buf)
    return buf.getvalue()


def import_matrix(fh: TextIO) -> SensingMatrix:
    first = fh.readline()
    try:
        head = json.loads(first)
        family = Family(head["family"])
        K, N, M = int(head["K"]), int(head["N"]), int(head["M"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad matrix header: {exc}") from exc
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) != K:
        raise FormatError(f"expected {K} rows, found {len(lines)}")
    prov = {k: head.get(k) for k in ("p", "m", "alpha", "modulus_poly", "seed")}
    try:
        if family.deterministic:
            exps = np.array([[int(v) for v in ln.split(",")] for ln in lines], dtype=np.int64)
            if exps.shape != (K, N):
                raise FormatError(f"exponent table has shape {exps.shape}, expected {(K, N)}")
            if exps.min() < 0 or exps.max() >= M:
                raise FormatError("exponent out of range [0, M)")
            exps.setflags(write=False)
            # column 0 is the unshifted base sequence with multiplier 1
            seq = SymbolSequence(exps[:, 0].copy(), M, family)
            return SensingMatrix(K, N, M, family, exps, seq, prov)
        vals = np.array([[float(v) for v in ln.split(",")] for ln in lines])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if vals.shape != (K, 2 * N):
        raise FormatError(f"value table has shape {vals.shape}, expected {(K, 2 * N)}")
    a = vals[:, 0::2] + 1j * vals[:, 1::2]
    if family is Family.GAUSSIAN:
        a = a.real.copy()
    a.setflags(write=False)
    return SensingMatrix(K, N, M, family, provenance=prov, _dense=a)


def rebuild_from_header(mat: SensingMatrix) -> SensingMatrix:
    """Re-derive a deterministic matrix from its recorded parameters."""
    prov = mat.provenance
    if not mat.family.deterministic:
        raise FamilyMismatch("only deterministic families can be re-derived")
    if prov.get("p") is None:
        raise FormatError("header lacks field parameters")
    return build_matrix(mat.family, int(prov["p"]), mat.M, int(prov.get("m") or 1))

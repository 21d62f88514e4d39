"""M-ary power residue and Sidelnikov sequences and their modulation.

Both families are logarithms reduced mod ``M``:

    power residue   r(k) = log(k)          mod M,  k in [0, p-1]
    Sidelnikov      s(k) = log(alpha^k + 1) mod M, k in [0, q-2]

with ``log(0) = 0``.  Symbols stay integers until :func:`modulate` maps them to
roots of unity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AlphabetMismatch, RangeError, TrivialCharacter
from .galois import FieldContext


class Family(str, enum.Enum):
    POWER_RESIDUE = "power-residue"
    SIDELNIKOV = "sidelnikov"
    GAUSSIAN = "gaussian"
    PARTIAL_FOURIER = "partial-fourier"

    @property
    def deterministic(self) -> bool:
        return self in (Family.POWER_RESIDUE, Family.SIDELNIKOV)


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    symbols: np.ndarray
    M: int
    family: Family
    field: FieldContext | None = None

    @property
    def period(self) -> int:
        return len(self.symbols)


@lru_cache(maxsize=None)
def roots_of_unity(M: int) -> np.ndarray:
    """``exp(2j*pi*t/M)`` for ``t = 0..M-1``; entry 0 is exactly 1."""
    t = np.arange(M)
    w = np.exp(2j * np.pi * t / M)
    w[0] = 1.0
    w.setflags(write=False)
    return w


def _check_alphabet(M: int, order: int) -> None:
    if M <= 2:
        raise AlphabetMismatch(f"alphabet size must exceed 2, got M={M}")
    if order % M:
        raise AlphabetMismatch(f"M={M} does not divide q-1={order}")


def power_residue_sequence(ctx: FieldContext, M: int) -> SymbolSequence:
    if ctx.m != 1:
        raise AlphabetMismatch("power residue sequences need a prime field")
    _check_alphabet(M, ctx.p - 1)
    symbols = ctx.log[np.arange(ctx.p)] % M
    symbols.setflags(write=False)
    return SymbolSequence(symbols, M, Family.POWER_RESIDUE, ctx)


def sidelnikov_sequence(ctx: FieldContext, M: int) -> SymbolSequence:
    _check_alphabet(M, ctx.q - 1)
    shifted = ctx.add(ctx.antilog, 1)
    symbols = ctx.log[shifted] % M
    symbols.setflags(write=False)
    return SymbolSequence(symbols, M, Family.SIDELNIKOV, ctx)


def modulated_exponents(seq: SymbolSequence, c: int, b: int) -> np.ndarray:
    """``(c * symbols[(k + b) mod period]) mod M`` as integers."""
    if not 1 <= c <= seq.M - 1:
        raise RangeError(f"multiplier c={c} outside [1, {seq.M - 1}]")
    if not 0 <= b < seq.period:
        raise RangeError(f"shift b={b} outside [0, {seq.period - 1}]")
    return (c * np.roll(seq.symbols, -b)) % seq.M


def modulate(seq: SymbolSequence, c: int, b: int) -> np.ndarray:
    return roots_of_unity(seq.M)[modulated_exponents(seq, c, b)]


# -- Weil-bound oracle --------------------------------------------------------

def _character_exponents(ctx: FieldContext, M: int, c1, c2, b1: int, b2: int):
    x = np.arange(ctx.q)
    l1 = ctx.log[ctx.add(x, b1)]
    l2 = ctx.log[ctx.add(x, b2)]
    c1 = np.asarray(c1)[..., None]
    c2 = np.asarray(c2)[..., None]
    return (c1 * l1 + c2 * l2) % M


def weil_bound(q: int, distinct: bool) -> float:
    """``(d-1) sqrt(q) + sum(e_i)`` for one or two linear factors."""
    return math.sqrt(q) + 2 if distinct else 1.0


def weil_sum_check(ctx: FieldContext, M: int, c1: int, c2: int, b1: int, b2: int):
    """Brute-force ``|sum_x psi^c1(x+b1) psi^c2(x+b2)|`` against the Weil bound.

    ``psi`` is the order-``M`` character with ``psi(0) = 1``; ``b1``, ``b2`` are
    field elements.  Returns ``(magnitude, bound, holds)``.
    """
    _check_alphabet(M, ctx.q - 1)
    e = _character_exponents(ctx, M, c1, c2, b1, b2)
    if not e.any():
        raise TrivialCharacter(f"product character is identically 1 (c1={c1}, c2={c2}, b1={b1}, b2={b2})")
    w = roots_of_unity(M)
    magnitude = float(abs(w[e].sum()))
    bound = weil_bound(ctx.q, b1 != b2)
    return magnitude, bound, magnitude <= bound + 1e-9


def weil_sum_sweep(ctx: FieldContext, M: int) -> tuple[int, int, float]:
    """Exhaustive check over every nontrivial ``(c1, c2, b1, b2)``.

    Each sum is still taken term by term over the field; the work is only
    batched over all ``(c1, c2)`` at once.  Returns ``(checked, failures,
    worst_margin)`` where margin is ``bound - magnitude``.
    """
    _check_alphabet(M, ctx.q - 1)
    w = roots_of_unity(M)
    c = np.arange(M)
    c1, c2 = np.meshgrid(c, c, indexing="ij")
    checked = failures = 0
    worst = math.inf
    for b1 in range(ctx.q):
        for b2 in range(ctx.q):
            e = _character_exponents(ctx, M, c1, c2, b1, b2)
            nontrivial = e.any(axis=-1)
            mags = np.abs(w[e].sum(axis=-1))[nontrivial]
            bound = weil_bound(ctx.q, b1 != b2)
            checked += mags.size
            failures += int((mags > bound + 1e-9).sum())
            worst = min(worst, float((bound - mags).min()))
    return checked, failures, worst

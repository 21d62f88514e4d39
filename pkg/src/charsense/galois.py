"""Table-driven arithmetic in GF(p) and GF(p^m).

Elements are integers in ``[0, q)``.  For ``m > 1`` an element encodes its
polynomial-basis coefficient vector base ``p``: ``sum(c[i] * p**i)`` is the
element ``c[0] + c[1] x + ... + c[m-1] x^(m-1)`` modulo the field polynomial.

Logarithms follow the convention ``log(0) = 0``, so that a character built on
top of them evaluates to 1 at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapExceeded, NotPrime

FIELD_CAP = 1 << 20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` in increasing order."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def find_primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group of GF(p)."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        return 1
    factors = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in factors):
            return g
    raise AssertionError("unreachable: every prime field has a primitive root")


# -- polynomials over GF(p), coefficient lists low -> high ------------------

def _trim(a: list[int]) -> list[int]:
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], f: list[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo the monic polynomial ``f``."""
    a = list(a)
    df = len(f) - 1
    for i in range(len(a) - 1, df - 1, -1):
        c = a[i] % p
        if c:
            for j in range(df + 1):
                a[i - df + j] = (a[i - df + j] - c * f[j]) % p
    a = [x % p for x in a[:df]] or [0]
    return _trim(a)


def _poly_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _poly_mod(prod, f, p)


def _poly_powmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(a, f, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _digits(n: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        n, r = divmod(n, p)
        out.append(r)
    return out


def _undigits(c, p: int) -> int:
    n = 0
    for x in reversed(list(c)):
        n = n * p + int(x)
    return n


def is_irreducible(f: list[int], p: int) -> bool:
    """Brute force: no monic divisor of degree 1..deg(f)//2."""
    m = len(f) - 1
    if m <= 0:
        return False
    if m == 1:
        return True
    for d in range(1, m // 2 + 1):
        for low in range(p**d):
            g = _digits(low, p, d) + [1]
            if _poly_mod(f, g, p) == [0]:
                return False
    return True


def _is_primitive_poly_element(a: list[int], f: list[int], p: int, q: int) -> bool:
    if _poly_mod(a, f, p) == [0]:
        return False
    for r in prime_factors(q - 1):
        if _poly_powmod(a, (q - 1) // r, f, p) == [1]:
            return False
    return True


def _monic_candidates(p: int, m: int):
    # scan order: integer value of the lower coefficient vector, base p
    for low in range(p**m):
        yield _digits(low, p, m) + [1]


@dataclass(frozen=True, eq=False)
class FieldContext:
    """GF(p^m) with a fixed primitive element and its log/antilog tables."""

    p: int
    m: int
    q: int
    modulus_poly: tuple[int, ...]
    alpha: int
    antilog: np.ndarray
    log: np.ndarray

    @property
    def alpha_vector(self) -> tuple[int, ...]:
        return tuple(_digits(self.alpha, self.p, self.m))

    def add(self, a, b):
        if self.m == 1:
            return (np.asarray(a) + np.asarray(b)) % self.p
        a = np.asarray(a)
        b = np.asarray(b)
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        place = 1
        for _ in range(self.m):
            out += ((a // place + b // place) % self.p) * place
            place *= self.p
        return out

    def neg(self, a):
        if self.m == 1:
            return (-np.asarray(a)) % self.p
        a = np.asarray(a)
        out = np.zeros(a.shape, dtype=np.int64)
        place = 1
        for _ in range(self.m):
            out += ((-(a // place)) % self.p) * place
            place *= self.p
        return out

    def mul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        t = (self.log[a] + self.log[b]) % (self.q - 1)
        return np.where((a == 0) | (b == 0), 0, self.antilog[t])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self.antilog[(int(self.log[a]) * e) % (self.q - 1)])


def _tables_by_repeated_mult(mul_alpha, q: int) -> tuple[np.ndarray, np.ndarray]:
    antilog = np.zeros(q - 1, dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    x = 1
    for t in range(q - 1):
        antilog[t] = x
        log[x] = t
        x = mul_alpha(x)
    if x != 1:
        raise AssertionError("generator does not have order q-1")
    antilog.setflags(write=False)
    log.setflags(write=False)
    return antilog, log


@lru_cache(maxsize=64)
def build_field(p: int, m: int = 1) -> FieldContext:
    """Construct GF(p^m) deterministically.

    For ``m > 1`` the modulus is the first monic irreducible polynomial, in
    increasing order of its lower coefficients read base ``p``, whose root
    ``x`` is primitive; ``alpha = x``.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    q = p**m
    if q > FIELD_CAP:
        raise CapExceeded(f"q = {q} exceeds the table cap {FIELD_CAP}")

    if m == 1:
        g = find_primitive_root(p)
        antilog, log = _tables_by_repeated_mult(lambda x: x * g % p, q)
        return FieldContext(p, 1, q, (), g, antilog, log)

    modulus = None
    for f in _monic_candidates(p, m):
        if is_irreducible(f, p) and _is_primitive_poly_element([0, 1], f, p, q):
            modulus, alpha_poly = f, [0, 1]
            break
    if modulus is None:  # pragma: no cover - primitive polynomials always exist
        modulus = next(f for f in _monic_candidates(p, m) if is_irreducible(f, p))
        alpha_poly = next(
            _digits(e, p, m)
            for e in range(1, q)
            if _is_primitive_poly_element(_digits(e, p, m), modulus, p, q)
        )

    alpha = _undigits(alpha_poly, p)
    if alpha_poly == [0, 1]:
        # multiply by x: shift up, fold the top coefficient back through the modulus
        top_place = p ** (m - 1)

        def mul_alpha(x: int) -> int:
            lead, rest = divmod(x, top_place)
            if not lead:
                return rest * p
            c = _digits(rest * p, p, m)
            for j in range(m):
                c[j] = (c[j] - lead * modulus[j]) % p
            return _undigits(c, p)

    else:  # pragma: no cover
        alpha_digits = _digits(alpha, p, m)

        def mul_alpha(x: int) -> int:
            return _undigits(_poly_mulmod(_digits(x, p, m), alpha_digits, modulus, p), p)

    antilog, log = _tables_by_repeated_mult(mul_alpha, q)
    return FieldContext(p, m, q, tuple(modulus), alpha, antilog, log)


def discrete_log(ctx: FieldContext, x):
    """Exponent ``t`` in ``[0, q-2]`` with ``alpha**t == x``; 0 for ``x == 0``."""
    if np.ndim(x) == 0:
        return int(ctx.log[int(x)])
    return ctx.log[np.asarray(x)]


def with_generator(ctx: FieldContext, alpha: int) -> FieldContext:
    """The same field re-tabulated against another primitive element."""
    from math import gcd

    u = int(ctx.log[alpha]) if alpha else 0
    if alpha == 0 or gcd(u, ctx.q - 1) != 1:
        raise ValueError(f"{alpha} is not a primitive element of GF({ctx.q})")
    antilog = ctx.antilog[(np.arange(ctx.q - 1) * u) % (ctx.q - 1)]
    log = np.zeros(ctx.q, dtype=np.int64)
    log[antilog] = np.arange(ctx.q - 1)
    antilog.setflags(write=False)
    log.setflags(write=False)
    return FieldContext(ctx.p, ctx.m, ctx.q, ctx.modulus_poly, alpha, antilog, log)

"""Arithmetic in the truncated polynomial ring Z[X]/(X^N - 1).

Elements are dense coefficient tuples, coefficient of X^i at index i.
Reduction modulo q or p is always explicit via :func:`reduce_mod`; the
ring operations themselves work over the integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import numpy as np

_INT64_SAFE = 1 << 62


class DimensionError(ValueError):
    """Operands live in rings of different degree."""


class NotInvertible(ArithmeticError):
    """The element has no inverse in Z_m[X]/(X^N - 1)."""


@dataclass(frozen=True)
class RingParams:
    N: int
    q: int = 2048
    p: int = 3

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.q < 16:
            raise ValueError(f"q must be >= 16, got {self.q}")
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"p={self.p} and q={self.q} must be coprime")


@dataclass(frozen=True)
class RingElement:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("a ring element needs at least one coefficient")

    @classmethod
    def from_iterable(cls, values: Iterable[int]) -> "RingElement":
        return cls(tuple(int(v) for v in values))

    @classmethod
    def zero(cls, N: int) -> "RingElement":
        return cls((0,) * N)

    @classmethod
    def one(cls, N: int) -> "RingElement":
        return cls.monomial(N, 0)

    @classmethod
    def monomial(cls, N: int, degree: int, coeff: int = 1) -> "RingElement":
        c = [0] * N
        c[degree % N] = coeff
        return cls(tuple(c))

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def to_array(self) -> np.ndarray:
        """Coefficients as an int64 array, or an object array if they do not fit."""
        if max(abs(c) for c in self.coeffs) < _INT64_SAFE:
            return np.array(self.coeffs, dtype=np.int64)
        return np.array(self.coeffs, dtype=object)

    def max_abs(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def is_ternary(self) -> bool:
        return all(c in (-1, 0, 1) for c in self.coeffs)

    def __add__(self, other: "RingElement") -> "RingElement":
        return add(self, other)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return sub(self, other)

    def __neg__(self) -> "RingElement":
        return RingElement(tuple(-c for c in self.coeffs))

    def __mul__(self, other: "RingElement") -> "RingElement":
        return mul(self, other)

    def __str__(self) -> str:
        return format_element(self)


def _check_same_n(a: RingElement, b: RingElement) -> None:
    if a.N != b.N:
        raise DimensionError(f"degree mismatch: {a.N} != {b.N}")


def add(a: RingElement, b: RingElement) -> RingElement:
    _check_same_n(a, b)
    return RingElement(tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))


def sub(a: RingElement, b: RingElement) -> RingElement:
    _check_same_n(a, b)
    return RingElement(tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))


def scale(a: RingElement, k: int) -> RingElement:
    return RingElement(tuple(k * c for c in a.coeffs))


def _convolve(a: Sequence[int], b: Sequence[int]) -> np.ndarray:
    """Exact linear convolution of two integer sequences."""
    amax = max((abs(int(x)) for x in a), default=0)
    bmax = max((abs(int(x)) for x in b), default=0)
    if amax * bmax * min(len(a), len(b)) < _INT64_SAFE:
        return np.convolve(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    # arbitrary precision fallback
    return np.convolve(np.array([int(x) for x in a], dtype=object),
                       np.array([int(x) for x in b], dtype=object))


def _fold(full: np.ndarray, N: int) -> np.ndarray:
    out = full[:N].copy()
    out[: len(full) - N] += full[N:]
    return out


def mul(a: RingElement, b: RingElement) -> RingElement:
    """Cyclic convolution: result_k = sum over i + j = k (mod N) of a_i * b_j."""
    _check_same_n(a, b)
    N = a.N
    if N == 1:
        return RingElement((a.coeffs[0] * b.coeffs[0],))
    return RingElement(tuple(int(c) for c in _fold(_convolve(a.coeffs, b.coeffs), N)))


def _reduce_ints(values: Iterable[int], m: int, centered: bool) -> tuple[int, ...]:
    half = m // 2
    out = []
    for c in values:
        r = int(c) % m
        # centered representative lies in (-m/2, m/2]
        if centered and r > half:
            r -= m
        out.append(r)
    return tuple(out)


def reduce_mod(a: RingElement, m: int, centered: bool = False) -> RingElement:
    """Reduce every coefficient mod ``m``.

    ``centered=False`` gives representatives in ``[0, m)``;
    ``centered=True`` gives representatives in ``(-m/2, m/2]``.
    """
    if m < 2:
        raise ValueError(f"invalid modulus {m}")
    return RingElement(_reduce_ints(a.coeffs, m, centered))


# --- inversion -------------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


def _trim(poly: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(poly)
    if len(nz) == 0:
        return poly[:0]
    return poly[: nz[-1] + 1]


def _gf_mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.asarray(_convolve(a, b) % p, dtype=np.int64)


def _gf_sub(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=np.int64)
    out[: len(a)] += a
    out[: len(b)] -= b
    return _trim(out % p)


def _gf_divmod(num: np.ndarray, den: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Polynomial long division over GF(p); ``den`` must be trimmed and nonzero."""
    r = num.copy()
    dd = len(den) - 1
    inv_lead = pow(int(den[-1]), -1, p)
    if len(r) - 1 < dd:
        return np.zeros(0, dtype=np.int64), _trim(r)
    quot = np.zeros(len(r) - dd, dtype=np.int64)
    for shift in range(len(r) - 1 - dd, -1, -1):
        c = int(r[shift + dd]) * inv_lead % p
        if c:
            quot[shift] = c
            r[shift: shift + dd + 1] = (r[shift: shift + dd + 1] - c * den) % p
    return _trim(quot), _trim(r[:dd] if dd > 0 else r[:0])


def _invert_prime(a: RingElement, p: int) -> RingElement:
    N = a.N
    modulus = np.zeros(N + 1, dtype=np.int64)
    modulus[0] = p - 1
    modulus[N] = 1
    r0, r1 = modulus, _trim(np.array(_reduce_ints(a.coeffs, p, False), dtype=np.int64))
    t0, t1 = np.zeros(0, dtype=np.int64), np.ones(1, dtype=np.int64)
    while len(r1):
        quot, rem = _gf_divmod(r0, r1, p)
        r0, r1 = r1, rem
        t0, t1 = t1, _gf_sub(t0, _gf_mul(quot, t1, p), p)
    # r0 is gcd(a, X^N - 1) up to a unit
    if len(r0) != 1:
        raise NotInvertible(f"element shares a factor with X^{N} - 1 mod {p}")
    inv = (t0 * pow(int(r0[0]), -1, p)) % p
    coeffs = np.zeros(N, dtype=np.int64)
    coeffs[: len(inv)] = inv[:N]
    return RingElement(tuple(int(c) for c in coeffs))


def invert_mod(a: RingElement, m: int) -> RingElement:
    """Inverse of ``a`` in Z_m[X]/(X^N - 1), coefficients in ``[0, m)``.

    ``m`` must be prime (extended Euclid in GF(m)[X]) or a power of two
    (inverse mod 2, then Newton lifting b <- b(2 - ab)).
    Raises :class:`NotInvertible` when no inverse exists.
    """
    if _is_prime(m):
        return _invert_prime(a, m)
    if not _is_power_of_two(m):
        raise ValueError(f"modulus {m} is neither prime nor a power of two")
    b = _invert_prime(a, 2)
    two = RingElement.monomial(a.N, 0, 2)
    mod = 2
    while mod < m:
        mod = min(mod * mod, m)
        b = reduce_mod(mul(b, sub(two, reduce_mod(mul(a, b), mod))), mod)
    return b


# --- text serialization ----------------------------------------------------


def format_element(a: RingElement) -> str:
    return " ".join(str(c) for c in a.coeffs)


def parse_element(line: str, N: int | None = None) -> RingElement:
    try:
        values = [int(tok) for tok in line.split()]
    except ValueError as exc:
        raise ValueError(f"bad coefficient line: {exc}") from None
    if N is not None and len(values) != N:
        raise DimensionError(f"expected {N} coefficients, got {len(values)}")
    return RingElement(tuple(values))

"""Word-level modular arithmetic.

Every routine models a machine with ``w``-bit words and ``2w``-bit products.
Scalar functions operate on Python ints; the ``*_vec`` variants operate on
``numpy.uint64`` arrays and emulate the double-word intermediates with
32-bit limbs, so no value ever leaves 64-bit lanes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sympy import isprime

WORD_BITS = 54

_U64 = np.uint64
_M32 = _U64(0xFFFFFFFF)
_S32 = _U64(32)


@dataclass(frozen=True)
class Modulus:
    """A prime modulus ``p`` with its Barrett constant for a ``w``-bit word."""

    p: int
    w: int = WORD_BITS
    barrett_u: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 8 <= self.w <= 63:
            raise ValueError(f"word size must be in [8, 63], got {self.w}")
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p >= 1 << (self.w - 2):
            raise ValueError(f"modulus {self.p} does not fit below 2^{self.w - 2}")
        object.__setattr__(self, "barrett_u", (1 << (2 * self.w)) // self.p)

    @property
    def mask(self) -> int:
        return (1 << self.w) - 1

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    def __int__(self):
        return self.p


@dataclass(frozen=True)
class ShoupPair:
    """An operand ``y`` together with its quotient ``floor(y * 2^w / p)``."""

    y: int
    y_shoup: int


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------

def barrett_reduce(x: int, m: Modulus) -> int:
    """Reduce a double word ``x`` modulo ``m.p``.

    Products of two residues satisfy ``x <= (p-1)^2``; the estimate stays
    within one of the true quotient for any ``x < 2^(2w)``.
    """
    assert 0 <= x < 1 << (2 * m.w), "barrett_reduce input out of range"
    q = (x * m.barrett_u) >> (2 * m.w)
    r = x - q * m.p
    # q underestimates the true quotient by at most one
    assert r < 2 * m.p
    if r >= m.p:
        r -= m.p
    return r


def precompute_shoup(y: int, m: Modulus) -> ShoupPair:
    assert 0 <= y < m.p
    return ShoupPair(y, (y << m.w) // m.p)


def mul_red(x: int, sp: ShoupPair, m: Modulus) -> int:
    """Shoup multiplication ``x * sp.y mod p`` using only word products."""
    mask = m.mask
    z = (x * sp.y) & mask             # low word of x*y
    t = (x * sp.y_shoup) >> m.w       # high word of x*y'
    z_eps = (t * m.p) & mask
    z = (z - z_eps) & mask
    assert z < 2 * m.p, "more than one correction needed"
    if z >= m.p:
        z -= m.p
    return z


def add_mod(x: int, y: int, m: Modulus) -> int:
    z = x + y
    return z - m.p if z >= m.p else z


def sub_mod(x: int, y: int, m: Modulus) -> int:
    return x - y if x >= y else x - y + m.p


def pow_mod(x: int, e: int, m: Modulus) -> int:
    return pow(x, e, m.p)


def inv_mod(x: int, m: Modulus) -> int:
    if x % m.p == 0:
        raise ZeroDivisionError(f"{x} is not invertible modulo {m.p}")
    return pow(x, -1, m.p)


# ---------------------------------------------------------------------------
# prime and root generation
# ---------------------------------------------------------------------------

def gen_ntt_primes(n: int, w: int = WORD_BITS, count: int = 1,
                   max_bits: int | None = None,
                   exclude: set[int] | frozenset[int] = frozenset()) -> list[Modulus]:
    """Return ``count`` primes ``p = 1 (mod 2n)`` scanning down from ``2^max_bits``.

    ``max_bits`` defaults to ``w - 2``, the largest size Shoup multiplication
    tolerates. Primes listed in ``exclude`` are skipped.
    """
    if n < 1 or n & (n - 1):
        raise ValueError("ring degree must be a power of two")
    if count < 1:
        raise ValueError("count must be positive")
    top = w - 2 if max_bits is None else max_bits
    if top > w - 2:
        raise ValueError(f"max_bits={top} exceeds word limit {w - 2}")
    step = 2 * n
    c = ((1 << top) - 2) // step * step + 1
    out = []
    while c > 1 and len(out) < count:
        if c not in exclude and isprime(c):
            out.append(Modulus(c, w))
        c -= step
    if len(out) < count:
        raise ValueError(
            f"insufficient primes: found {len(out)} of {count} below 2^{top} with p = 1 mod {step}")
    return out


def find_primitive_root(m: Modulus, n: int) -> int:
    """Smallest ``psi`` of multiplicative order exactly ``2n`` modulo ``m.p``."""
    p = m.p
    order = 2 * n
    if (p - 1) % order:
        raise ValueError(f"{p} is not 1 mod {order}; no primitive {order}-th root")
    factors = _prime_factors(p - 1)
    g = 2
    while any(pow(g, (p - 1) // f, p) == 1 for f in factors):
        g += 1
    psi0 = pow(g, (p - 1) // order, p)
    # every primitive 2n-th root is an odd power of psi0
    step = psi0 * psi0 % p
    cur = psi0
    best = cur
    for _ in range(n - 1):
        cur = cur * step % p
        if cur < best:
            best = cur
    if pow(best, n, p) != p - 1:
        raise RuntimeError("no root")
    return best


def _prime_factors(x: int) -> list[int]:
    from sympy import factorint
    return list(factorint(x))


# ---------------------------------------------------------------------------
# vectorised kernels (numpy uint64 lanes)
# ---------------------------------------------------------------------------

def mul_wide(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full 128-bit product of uint64 arrays as ``(hi, lo)`` words."""
    a_lo = a & _M32
    a_hi = a >> _S32
    b_lo = b & _M32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    mid = (ll >> _S32) + (lh & _M32) + (hl & _M32)
    lo = (ll & _M32) | (mid << _S32)
    hi = a_hi * b_hi + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, lo


def add_wide(h1, l1, h2, l2):
    lo = l1 + l2
    carry = (lo < l1).astype(np.uint64)
    return h1 + h2 + carry, lo


def _shr128(hi, lo, s: int):
    if s == 0:
        return lo
    if s >= 64:
        return hi >> _U64(s - 64)
    return (lo >> _U64(s)) | (hi << _U64(64 - s))


def _shr192(x2, x1, x0, s: int):
    if s >= 128:
        return x2 >> _U64(s - 128)
    if s >= 64:
        return _shr128(x2, x1, s - 64)
    return _shr128(x1, x0, s)


def _native(m: Modulus) -> bool:
    return m.barrett_u < 1 << 64


def barrett_reduce_wide(hi: np.ndarray, lo: np.ndarray, m: Modulus) -> np.ndarray:
    """Vector Barrett reduction of double words ``hi * 2^64 + lo < 2^(2w)``."""
    if not _native(m):
        return _object_reduce(hi, lo, m)
    u = _U64(m.barrett_u)
    p = _U64(m.p)
    h1, l1 = mul_wide(lo, u)
    h2, l2 = mul_wide(hi, u)
    x1 = h1 + l2
    carry = (x1 < h1).astype(np.uint64)
    x2 = h2 + carry
    q = _shr192(x2, x1, l1, 2 * m.w)
    r = lo - q * p
    if __debug__:
        assert np.all(r < 2 * p)
    return np.where(r >= p, r - p, r)


def _object_reduce(hi, lo, m):
    out = [((int(h) << 64) | int(l)) % m.p for h, l in zip(hi.ravel(), lo.ravel())]
    return np.array(out, dtype=np.uint64).reshape(lo.shape)


def barrett_reduce_vec(x: np.ndarray, m: Modulus) -> np.ndarray:
    """Reduce single-word values ``x < 2^w`` into ``[0, p)``."""
    x = np.asarray(x, dtype=np.uint64)
    return barrett_reduce_wide(np.zeros_like(x), x, m)


def mul_mod_vec(a: np.ndarray, b: np.ndarray, m: Modulus) -> np.ndarray:
    """Coefficientwise ``a * b mod p`` via a double-word product and Barrett."""
    hi, lo = mul_wide(a, b)
    return barrett_reduce_wide(hi, lo, m)


def shoup_vec(y: np.ndarray, m: Modulus) -> np.ndarray:
    """Vector ``floor(y * 2^w / p)``."""
    y = np.asarray(y, dtype=np.uint64)
    if not _native(m):
        return np.array([(int(v) << m.w) // m.p for v in y.ravel()],
                        dtype=np.uint64).reshape(y.shape)
    hi = y >> _U64(64 - m.w)
    lo = y << _U64(m.w)
    u = _U64(m.barrett_u)
    p = _U64(m.p)
    h1, l1 = mul_wide(lo, u)
    h2, l2 = mul_wide(hi, u)
    x1 = h1 + l2
    x2 = h2 + (x1 < h1).astype(np.uint64)
    q = _shr192(x2, x1, l1, 2 * m.w)
    r = lo - q * p
    return np.where(r >= p, q + _U64(1), q)


def mul_red_vec(x: np.ndarray, y: np.ndarray, y_shoup: np.ndarray, m: Modulus) -> np.ndarray:
    """Vector form of :func:`mul_red`; ``y`` and ``y_shoup`` may be scalars."""
    mask = _U64(m.mask)
    p = _U64(m.p)
    z = (x * y) & mask
    hi, lo = mul_wide(x, np.asarray(y_shoup, dtype=np.uint64))
    t = _shr128(hi, lo, m.w)
    z_eps = (t * p) & mask
    z = (z - z_eps) & mask
    if __debug__:
        assert np.all(z < 2 * p)
    return np.where(z >= p, z - p, z)


def add_mod_vec(x: np.ndarray, y: np.ndarray, m: Modulus) -> np.ndarray:
    p = _U64(m.p)
    z = x + y
    return np.where(z >= p, z - p, z)


def sub_mod_vec(x: np.ndarray, y: np.ndarray, m: Modulus) -> np.ndarray:
    p = _U64(m.p)
    return np.where(x >= y, x - y, x + (p - y))


def neg_mod_vec(x: np.ndarray, m: Modulus) -> np.ndarray:
    p = _U64(m.p)
    return np.where(x == 0, x, p - x)

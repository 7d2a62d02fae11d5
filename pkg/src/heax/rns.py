"""Residue number system representation of ring elements."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import prod

import numpy as np

from .modarith import (
    Modulus,
    add_mod_vec,
    barrett_reduce_vec,
    mul_red_vec,
    neg_mod_vec,
    shoup_vec,
    sub_mod_vec,
)
from .ntt import NttTable, ntt_forward, ntt_inverse, ntt_table

COEFF = "coeff"
NTT = "ntt"


class RnsError(ValueError):
    pass


class RnsBasis:
    """Ordered coprime moduli ``p_0..p_L`` plus an optional special modulus.

    Big-integer constants are derived on demand and only used by test,
    key-generation and decryption paths.
    """

    def __init__(self, moduli, n: int, special: Modulus | None = None):
        moduli = tuple(moduli)
        if not moduli:
            raise RnsError("basis needs at least one modulus")
        values = [m.p for m in moduli]
        if special is not None:
            values.append(special.p)
        if len(set(values)) != len(values):
            raise RnsError("moduli must be distinct primes")
        for m in moduli + ((special,) if special is not None else ()):
            if (m.p - 1) % (2 * n):
                raise RnsError(f"modulus {m.p} is not 1 mod {2 * n}")
        self.moduli = moduli
        self.special = special
        self.n = n

    def __eq__(self, other):
        return (isinstance(other, RnsBasis) and self.n == other.n
                and self.moduli == other.moduli and self.special == other.special)

    def __hash__(self):
        return hash((self.n, self.moduli, self.special))

    def __repr__(self):
        sp = self.special.p if self.special else None
        return f"RnsBasis(n={self.n}, moduli={[m.p for m in self.moduli]}, special={sp})"

    @property
    def max_level(self) -> int:
        return len(self.moduli) - 1

    def row_moduli(self, level: int, special: bool = False) -> tuple[Modulus, ...]:
        rows = self.moduli[:level + 1]
        if special:
            if self.special is None:
                raise RnsError("basis has no special modulus")
            rows = rows + (self.special,)
        return rows

    def table(self, m: Modulus) -> NttTable:
        return ntt_table(m, self.n)

    @cached_property
    def q_level_products(self) -> list[int]:
        out, acc = [], 1
        for m in self.moduli:
            acc *= m.p
            out.append(acc)
        return out

    def crt_constants(self, level: int, special: bool = False):
        """Return ``(q, [pi_i], [pi_i^-1 mod p_i])`` for the selected rows."""
        return _crt_constants(tuple(m.p for m in self.row_moduli(level, special)))

    def gadget_vector(self, level: int | None = None) -> list[int]:
        """``g_i = pi_i * [pi_i^-1]_{p_i}`` relative to ``q_level``."""
        level = self.max_level if level is None else level
        _, punct, inv = self.crt_constants(level)
        return [pi * iv for pi, iv in zip(punct, inv)]

    def floor_inv(self, divisor: Modulus, level: int) -> list[tuple[int, int]]:
        """``[divisor^-1]_{p_i}`` with Shoup companions for rows ``0..level``."""
        out = []
        for m in self.moduli[:level + 1]:
            v = pow(divisor.p, -1, m.p)
            out.append((v, (v << m.w) // m.p))
        return out


_CRT_CACHE: dict = {}


def _crt_constants(values: tuple[int, ...]):
    hit = _CRT_CACHE.get(values)
    if hit is None:
        q = prod(values)
        punct = [q // p for p in values]
        inv = [pow(pi % p, -1, p) for pi, p in zip(punct, values)]
        hit = _CRT_CACHE[values] = (q, punct, inv)
    return hit


@dataclass(eq=False)
class RnsPoly:
    """Residue rows of one ring element.

    ``residues[i]`` holds the element modulo ``basis.moduli[i]`` for
    ``i <= level``; when ``special`` is set a final row holds it modulo
    ``basis.special``.
    """

    residues: np.ndarray
    basis: RnsBasis
    level: int
    domain: str = COEFF
    special: bool = False

    def __post_init__(self):
        rows = self.level + 1 + int(self.special)
        if self.residues.shape != (rows, self.basis.n):
            raise RnsError(f"expected residues of shape {(rows, self.basis.n)}, "
                           f"got {self.residues.shape}")
        if self.domain not in (COEFF, NTT):
            raise RnsError(f"unknown domain {self.domain!r}")

    @property
    def moduli(self) -> tuple[Modulus, ...]:
        return self.basis.row_moduli(self.level, self.special)

    @property
    def n(self) -> int:
        return self.basis.n

    def copy(self) -> "RnsPoly":
        return RnsPoly(self.residues.copy(), self.basis, self.level, self.domain, self.special)

    def check_ranges(self) -> bool:
        return all(bool(np.all(row < np.uint64(m.p))) for row, m in zip(self.residues, self.moduli))

    def to_ntt(self) -> "RnsPoly":
        if self.domain == NTT:
            return self
        rows = [ntt_forward(r, self.basis.table(m)) for r, m in zip(self.residues, self.moduli)]
        return RnsPoly(np.stack(rows), self.basis, self.level, NTT, self.special)

    def to_coeff(self) -> "RnsPoly":
        if self.domain == COEFF:
            return self
        rows = [ntt_inverse(r, self.basis.table(m)) for r, m in zip(self.residues, self.moduli)]
        return RnsPoly(np.stack(rows), self.basis, self.level, COEFF, self.special)

    def restrict(self, level: int, special: bool | None = None) -> "RnsPoly":
        """Keep rows ``0..level`` and, if requested, the special row."""
        special = self.special if special is None else special
        if level > self.level or (special and not self.special):
            raise RnsError("cannot restrict to a larger basis")
        rows = [self.residues[i] for i in range(level + 1)]
        if special:
            rows.append(self.residues[-1])
        return RnsPoly(np.stack(rows), self.basis, level, self.domain, special)


def zeros(basis: RnsBasis, level: int, domain: str = COEFF, special: bool = False) -> RnsPoly:
    rows = level + 1 + int(special)
    return RnsPoly(np.zeros((rows, basis.n), dtype=np.uint64), basis, level, domain, special)


def to_rns(a, basis: RnsBasis, level: int | None = None, special: bool = False) -> RnsPoly:
    """Reduce integer coefficients (any sign, any size) into residue rows."""
    level = basis.max_level if level is None else level
    a = list(a)
    if len(a) != basis.n:
        raise RnsError(f"expected {basis.n} coefficients, got {len(a)}")
    rows = []
    small = all(-(1 << 62) < int(x) < (1 << 62) for x in a)
    if small:
        arr = np.array([int(x) for x in a], dtype=np.int64)
        for m in basis.row_moduli(level, special):
            rows.append((arr % m.p).astype(np.uint64))
    else:
        obj = np.array([int(x) for x in a], dtype=object)
        for m in basis.row_moduli(level, special):
            rows.append(np.array([int(v) for v in obj % m.p], dtype=np.uint64))
    return RnsPoly(np.stack(rows), basis, level, COEFF, special)


def crt_reconstruct(x: RnsPoly) -> list[int]:
    """Unique representatives in ``[0, Q)`` where ``Q`` is the product of the row moduli."""
    if x.domain != COEFF:
        raise RnsError("domain mismatch: crt_reconstruct needs coefficient form")
    q, punct, inv = x.basis.crt_constants(x.level, x.special)
    acc = np.zeros(x.n, dtype=object)
    for row, pi, iv, m in zip(x.residues, punct, inv, x.moduli):
        # reduce the small factor first so the big product is taken once
        t = (row.astype(object) * iv) % m.p
        acc += t * pi
    return [int(v) % q for v in acc]


def centered(values, q: int) -> list[int]:
    half = q // 2
    return [v - q if v > half else v for v in (int(u) % q for u in values)]


def gadget_decompose(a: RnsPoly) -> list[np.ndarray]:
    """Split ``a`` into its residue rows, each read as a small integer polynomial."""
    if a.domain != COEFF:
        raise RnsError("domain mismatch: gadget decomposition needs coefficient form")
    return [a.residues[i].copy() for i in range(a.level + 1)]


def reduce_row(src: np.ndarray, dst: Modulus) -> np.ndarray:
    """Lift residues of one modulus to integers and reduce them modulo ``dst``."""
    return barrett_reduce_vec(src, dst)


def _check_compatible(x: RnsPoly, y: RnsPoly):
    if x.basis != y.basis or x.level != y.level or x.special != y.special:
        raise RnsError("basis mismatch")
    if x.domain != y.domain:
        raise RnsError("domain mismatch")


def _rowwise(x: RnsPoly, y: RnsPoly, fn) -> RnsPoly:
    _check_compatible(x, y)
    rows = [fn(a, b, m) for a, b, m in zip(x.residues, y.residues, x.moduli)]
    return RnsPoly(np.stack(rows), x.basis, x.level, x.domain, x.special)


def rns_add(x: RnsPoly, y: RnsPoly) -> RnsPoly:
    return _rowwise(x, y, add_mod_vec)


def rns_sub(x: RnsPoly, y: RnsPoly) -> RnsPoly:
    return _rowwise(x, y, sub_mod_vec)


def rns_neg(x: RnsPoly) -> RnsPoly:
    rows = [neg_mod_vec(r, m) for r, m in zip(x.residues, x.moduli)]
    return RnsPoly(np.stack(rows), x.basis, x.level, x.domain, x.special)


def _dyadic_row(a, b, m):
    return mul_red_vec(a, b, shoup_vec(b, m), m)


def rns_dyadic_mul(x: RnsPoly, y: RnsPoly) -> RnsPoly:
    """Coefficientwise product of two NTT-form elements."""
    _check_compatible(x, y)
    if x.domain != NTT:
        raise RnsError("domain mismatch: dyadic product needs NTT form")
    return _rowwise(x, y, _dyadic_row)


def rns_scalar_mul(x: RnsPoly, c: int) -> RnsPoly:
    rows = []
    for r, m in zip(x.residues, x.moduli):
        v = c % m.p
        rows.append(mul_red_vec(r, v, (v << m.w) // m.p, m))
    return RnsPoly(np.stack(rows), x.basis, x.level, x.domain, x.special)

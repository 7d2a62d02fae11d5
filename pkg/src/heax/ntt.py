"""Negacyclic number-theoretic transform over Z_p[X]/(X^n + 1).

The forward transform is an in-place Cooley-Tukey network taking natural
order input to bit-reversed output. The inverse is the mirrored
Gentleman-Sande network, so a forward/inverse pair needs no reordering pass.
Output slot ``k`` of the forward transform holds ``a(psi^(2*brv(k) + 1))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .modarith import (
    Modulus,
    add_mod_vec,
    find_primitive_root,
    inv_mod,
    mul_red_vec,
    precompute_shoup,
    shoup_vec,
    sub_mod_vec,
)


def bit_reverse(i: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (i & 1)
        i >>= 1
    return r


@lru_cache(maxsize=None)
def bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


def bit_reverse_permutation(v):
    """Move element ``i`` to position ``bit_reverse(i)``; an involution."""
    n = len(v)
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    rev = bit_reverse_indices(n)
    if isinstance(v, np.ndarray):
        return v[rev]
    return [v[int(j)] for j in rev]


@dataclass(frozen=True, eq=False)
class NttTable:
    """Twiddle tables for one modulus and ring degree.

    ``psi_powers[i] = psi^brv(i)`` and ``inv_psi_powers[i] = psi^-brv(i)``,
    each with its Shoup companion array.
    """

    m: Modulus
    n: int
    psi: int
    psi_powers: np.ndarray
    psi_shoup: np.ndarray
    inv_psi_powers: np.ndarray
    inv_psi_shoup: np.ndarray
    n_inv: int
    n_inv_shoup: int

    @classmethod
    def build(cls, m: Modulus, n: int, psi: int | None = None) -> "NttTable":
        if n < 2 or n & (n - 1):
            raise ValueError("ring degree must be a power of two >= 2")
        if psi is None:
            psi = find_primitive_root(m, n)
        elif pow(psi, n, m.p) != m.p - 1:
            raise ValueError(f"{psi} is not a primitive {2 * n}-th root mod {m.p}")
        p = m.p
        powers = np.empty(n, dtype=np.uint64)
        inv_powers = np.empty(n, dtype=np.uint64)
        psi_inv = pow(psi, -1, p)
        cur, cur_inv = 1, 1
        natural = []
        natural_inv = []
        for _ in range(n):
            natural.append(cur)
            natural_inv.append(cur_inv)
            cur = cur * psi % p
            cur_inv = cur_inv * psi_inv % p
        rev = bit_reverse_indices(n)
        powers[:] = np.array(natural, dtype=np.uint64)[rev]
        inv_powers[:] = np.array(natural_inv, dtype=np.uint64)[rev]
        n_inv = inv_mod(n, m)
        tables = [powers, shoup_vec(powers, m), inv_powers, shoup_vec(inv_powers, m)]
        for t in tables:
            t.setflags(write=False)
        return cls(m, n, psi, *tables, n_inv, precompute_shoup(n_inv, m).y_shoup)

    @property
    def log_n(self) -> int:
        return self.n.bit_length() - 1


@lru_cache(maxsize=64)
def ntt_table(m: Modulus, n: int) -> NttTable:
    """Cached table for ``(m, n)`` using the smallest primitive root."""
    return NttTable.build(m, n)


class ButterflyCounter:
    """Counts butterfly evaluations when passed as ``counter=``."""

    def __init__(self):
        self.count = 0


def ntt_forward(a, t: NttTable, counter: ButterflyCounter | None = None) -> np.ndarray:
    """Forward negacyclic NTT, natural order in, bit-reversed order out."""
    a = np.array(a, dtype=np.uint64)
    n = t.n
    if a.shape[-1] != n:
        raise ValueError(f"expected {n} coefficients, got {a.shape[-1]}")
    m = t.m
    lead = a.shape[:-1]
    half = n
    groups = 1
    while groups < n:
        half //= 2
        blocks = a.reshape(*lead, groups, 2, half)
        y = t.psi_powers[groups:2 * groups, None]
        ys = t.psi_shoup[groups:2 * groups, None]
        u = blocks[..., 0, :]
        v = mul_red_vec(blocks[..., 1, :], y, ys, m)
        lo = add_mod_vec(u, v, m)
        hi = sub_mod_vec(u, v, m)
        blocks[..., 0, :] = lo
        blocks[..., 1, :] = hi
        if counter is not None:
            counter.count += groups * half
        groups *= 2
    return a


def ntt_inverse(a, t: NttTable, counter: ButterflyCounter | None = None) -> np.ndarray:
    """Inverse of :func:`ntt_forward`, including the ``1/n`` factor."""
    a = np.array(a, dtype=np.uint64)
    n = t.n
    if a.shape[-1] != n:
        raise ValueError(f"expected {n} coefficients, got {a.shape[-1]}")
    m = t.m
    lead = a.shape[:-1]
    half = 1
    groups = n // 2
    while groups >= 1:
        blocks = a.reshape(*lead, groups, 2, half)
        u = blocks[..., 0, :]
        v = blocks[..., 1, :]
        s = t.inv_psi_powers[groups:2 * groups, None]
        ss = t.inv_psi_shoup[groups:2 * groups, None]
        total = add_mod_vec(u, v, m)
        diff = sub_mod_vec(u, v, m)
        if groups == 1:
            # final stage absorbs the 1/n scaling
            s_scaled = int(s[0, 0]) * t.n_inv % m.p
            sp = precompute_shoup(s_scaled, m)
            blocks[..., 0, :] = mul_red_vec(total, t.n_inv, t.n_inv_shoup, m)
            blocks[..., 1, :] = mul_red_vec(diff, sp.y, sp.y_shoup, m)
        else:
            blocks[..., 0, :] = total
            blocks[..., 1, :] = mul_red_vec(diff, s, ss, m)
        if counter is not None:
            counter.count += groups * half
        half *= 2
        groups //= 2
    return a


def negacyclic_convolve_reference(a, b, m: Modulus) -> list[int]:
    """Schoolbook product modulo ``X^n + 1`` and ``p``; O(n^2) test oracle."""
    n = len(a)
    if len(b) != n:
        raise ValueError("operands must have equal length")
    a = [int(x) for x in a]
    bb = np.array([int(x) for x in b], dtype=object)
    acc = np.zeros(n, dtype=object)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        acc[i:] += ai * bb[:n - i]
        if i:
            acc[:i] -= ai * bb[n - i:]
    return [int(c) % m.p for c in acc]

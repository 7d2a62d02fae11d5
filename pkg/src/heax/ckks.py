"""Full-RNS CKKS: keys, symmetric encryption and the evaluation operations.

Ciphertexts stay in NTT form across every public operation. Plaintexts are
raw integer polynomials; the complex-slot encoder is not part of this
package, so a plaintext carries an explicit ``scale`` only as metadata.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modarith import (
    Modulus,
    WORD_BITS,
    add_mod_vec,
    add_wide,
    barrett_reduce_wide,
    gen_ntt_primes,
    mul_red_vec,
    mul_wide,
    shoup_vec,
    sub_mod_vec,
)
from .ntt import bit_reverse_indices, ntt_forward, ntt_inverse
from .rns import (
    COEFF,
    NTT,
    RnsBasis,
    RnsError,
    RnsPoly,
    centered,
    crt_reconstruct,
    reduce_row,
    rns_add,
    rns_dyadic_mul,
    rns_neg,
    rns_scalar_mul,
    to_rns,
    zeros,
)

ERROR_SIGMA = 3.2
ERROR_TAIL = 6.0

# (n, k, bit length of q*p)
PARAM_SETS = {
    "A": (1 << 12, 2, 109),
    "B": (1 << 13, 4, 218),
    "C": (1 << 14, 8, 438),
}


class CkksError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HeParams:
    n: int
    k: int
    log_qp: int
    basis: RnsBasis
    error_sigma: float = ERROR_SIGMA
    name: str = "custom"

    @property
    def max_level(self) -> int:
        return self.k - 1

    @property
    def special(self) -> Modulus:
        return self.basis.special

    def modulus_bits(self) -> int:
        return sum(m.bits for m in self.basis.moduli) + self.basis.special.bits


def split_bits(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + 1] * extra + [base] * (parts - extra)


def make_params(n: int, k: int, log_qp: int, w: int = WORD_BITS,
                error_sigma: float = ERROR_SIGMA, name: str = "custom") -> HeParams:
    """Generate ``k`` ciphertext primes plus a special prime totalling ``log_qp`` bits.

    Primes are taken just below ``2^b`` for a near-even split ``b`` of the
    bit budget; the largest becomes the special modulus.
    """
    used: set[int] = set()
    primes: list[Modulus] = []
    for b in split_bits(log_qp, k + 1):
        if b > w - 2:
            raise CkksError(f"{b}-bit primes do not fit a {w}-bit word")
        (m,) = gen_ntt_primes(n, w, 1, max_bits=b, exclude=used)
        used.add(m.p)
        primes.append(m)
    primes.sort(key=lambda m: m.p, reverse=True)
    basis = RnsBasis(primes[1:], n, special=primes[0])
    return HeParams(n, k, log_qp, basis, error_sigma, name)


def named_params(name: str) -> HeParams:
    key = name.upper().removeprefix("SET-")
    if key not in PARAM_SETS:
        raise CkksError(f"unknown parameter set {name!r}")
    n, k, log_qp = PARAM_SETS[key]
    return make_params(n, k, log_qp, name=f"Set-{key}")


def params_from_basis(basis: RnsBasis, log_qp: int | None = None,
                      error_sigma: float = ERROR_SIGMA, name: str = "custom") -> HeParams:
    if log_qp is None:
        q = math.prod(m.p for m in basis.moduli) * basis.special.p
        log_qp = q.bit_length()
    return HeParams(basis.n, len(basis.moduli), log_qp, basis, error_sigma, name)


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SecretKey:
    s: RnsPoly          # full basis plus special row, NTT form


@dataclass(eq=False)
class Ciphertext:
    components: list[RnsPoly]
    scale: float = 1.0

    @property
    def level(self) -> int:
        return self.components[0].level

    @property
    def basis(self) -> RnsBasis:
        return self.components[0].basis

    def __len__(self):
        return len(self.components)


@dataclass(eq=False)
class KeySwitchKey:
    """Gadget rows ``(d0_i, d1_i)``; each row spans every modulus plus the special one."""

    d0: list[RnsPoly]
    d1: list[RnsPoly]
    galois: int = 0      # Galois element for rotation keys, 0 otherwise
    _shoup: dict = field(default_factory=dict, repr=False)

    @property
    def basis(self) -> RnsBasis:
        return self.d0[0].basis

    @property
    def level(self) -> int:
        return self.d0[0].level

    def shoup(self, col: int, i: int) -> np.ndarray:
        key = (col, i)
        if key not in self._shoup:
            poly = (self.d0, self.d1)[col][i]
            self._shoup[key] = np.stack(
                [shoup_vec(r, m) for r, m in zip(poly.residues, poly.moduli)])
        return self._shoup[key]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_ternary(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(-1, 2, size=n, dtype=np.int64)


def sample_gaussian(rng: np.random.Generator, n: int, sigma: float = ERROR_SIGMA) -> np.ndarray:
    """Rounded Gaussian truncated at ``6 sigma``."""
    bound = ERROR_TAIL * sigma
    out = np.rint(rng.normal(0.0, sigma, size=n))
    bad = np.abs(out) > bound
    while bad.any():
        out[bad] = np.rint(rng.normal(0.0, sigma, size=int(bad.sum())))
        bad = np.abs(out) > bound
    return out.astype(np.int64)


def sample_uniform(basis: RnsBasis, level: int, special: bool,
                   rng: np.random.Generator) -> RnsPoly:
    rows = [rng.integers(0, m.p, size=basis.n, dtype=np.uint64)
            for m in basis.row_moduli(level, special)]
    return RnsPoly(np.stack(rows), basis, level, NTT, special)


# ---------------------------------------------------------------------------
# key generation and encryption
# ---------------------------------------------------------------------------

def keygen(params: HeParams, rng: np.random.Generator) -> SecretKey:
    s = sample_ternary(rng, params.n)
    poly = to_rns(s, params.basis, params.max_level, special=True).to_ntt()
    return SecretKey(poly)


def _as_ntt_message(m, basis: RnsBasis, level: int, special: bool) -> RnsPoly:
    if isinstance(m, RnsPoly):
        if m.level < level or (special and not m.special):
            raise CkksError("level mismatch")
        return m.restrict(level, special).to_ntt()
    return to_rns(m, basis, level, special).to_ntt()


def sym_enc(m, sk: SecretKey, params: HeParams, rng: np.random.Generator,
            level: int | None = None, special: bool = False, scale: float = 1.0) -> Ciphertext:
    """Return ``(-a*s + e + m, a)`` with ``a`` uniform and ``e`` Gaussian."""
    level = params.max_level if level is None else level
    basis = params.basis
    a = sample_uniform(basis, level, special, rng)
    e = to_rns(sample_gaussian(rng, params.n, params.error_sigma), basis, level, special).to_ntt()
    s = sk.s.restrict(level, special)
    msg = _as_ntt_message(m, basis, level, special)
    b = rns_add(rns_add(rns_neg(rns_dyadic_mul(a, s)), e), msg)
    return Ciphertext([b, a], scale)


def decrypt_poly(ct: Ciphertext, sk: SecretKey) -> RnsPoly:
    """``sum_j c_j * s^j`` in coefficient form, before CRT."""
    c0 = ct.components[0]
    if c0.level > sk.s.level or (c0.special and not sk.s.special):
        raise CkksError("level mismatch")
    s = sk.s.restrict(c0.level, c0.special)
    acc = c0
    power = None
    for c in ct.components[1:]:
        power = s if power is None else rns_dyadic_mul(power, s)
        acc = rns_add(acc, rns_dyadic_mul(c, power))
    return acc.to_coeff()


def decrypt(ct: Ciphertext, sk: SecretKey) -> list[int]:
    """Centered integer coefficients of the decrypted plaintext."""
    poly = decrypt_poly(ct, sk)
    q, _, _ = poly.basis.crt_constants(poly.level, poly.special)
    return centered(crt_reconstruct(poly), q)


def ksk_gen(s_prime: RnsPoly, sk: SecretKey, params: HeParams,
            rng: np.random.Generator) -> KeySwitchKey:
    """Encrypt ``p * g_i * s'`` under ``s`` for every gadget index ``i``."""
    basis = params.basis
    L = params.max_level
    if not s_prime.special or s_prime.level != L:
        raise CkksError("s' must span the full basis and the special modulus")
    s_prime = s_prime.to_ntt()
    p = basis.special.p
    d0, d1 = [], []
    for g in basis.gadget_vector(L):
        ct = sym_enc(rns_scalar_mul(s_prime, p * g), sk, params, rng, L, special=True)
        d0.append(ct.components[0])
        d1.append(ct.components[1])
    return KeySwitchKey(d0, d1)


def relin_keygen(sk: SecretKey, params: HeParams, rng: np.random.Generator) -> KeySwitchKey:
    return ksk_gen(rns_dyadic_mul(sk.s, sk.s), sk, params, rng)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _check_pair(ct0: Ciphertext, ct1: Ciphertext):
    if ct0.basis != ct1.basis:
        raise CkksError("basis mismatch")
    if ct0.level != ct1.level:
        raise CkksError("level mismatch")


def hom_add(ct0: Ciphertext, ct1: Ciphertext) -> Ciphertext:
    _check_pair(ct0, ct1)
    if not math.isclose(ct0.scale, ct1.scale, rel_tol=1e-12):
        raise CkksError("scale mismatch")
    if len(ct0) != len(ct1):
        raise CkksError("component count mismatch")
    comps = [rns_add(a, b) for a, b in zip(ct0.components, ct1.components)]
    return Ciphertext(comps, ct0.scale)


def hom_mul(ct0: Ciphertext, ct1: Ciphertext) -> Ciphertext:
    """Tensor product of ciphertexts; ``alpha + beta - 1`` output components.

    Each output row is the Barrett reduction of a double-word sum of
    dyadic products, as in the hardware dyadic core.
    """
    _check_pair(ct0, ct1)
    alpha, beta = len(ct0), len(ct1)
    basis, level = ct0.basis, ct0.level
    moduli = ct0.components[0].moduli
    out = []
    for t in range(alpha + beta - 1):
        pairs = [(i, t - i) for i in range(alpha) if 0 <= t - i < beta]
        rows = []
        for r, m in enumerate(moduli):
            acc = None
            for i, j in pairs:
                h, lo = mul_wide(ct0.components[i].residues[r], ct1.components[j].residues[r])
                if acc is None:
                    acc = (h, lo)
                else:
                    acc = add_wide(*acc, h, lo)
            rows.append(barrett_reduce_wide(*acc, m))
        out.append(RnsPoly(np.stack(rows), basis, level, NTT))
    return Ciphertext(out, ct0.scale * ct1.scale)


def _floor_rows(rows: np.ndarray, moduli, divisor: Modulus, basis: RnsBasis,
                level: int) -> np.ndarray:
    """Flooring by ``divisor`` whose residue is the last row of ``rows``.

    Returns rows ``0..level`` of ``(c - [c]_divisor) / divisor`` in NTT form.
    """
    a = ntt_inverse(rows[-1], basis.table(divisor))
    out = np.empty((level + 1, basis.n), dtype=np.uint64)
    for i in range(level + 1):
        m = moduli[i]
        r = ntt_forward(reduce_row(a, m), basis.table(m))
        diff = sub_mod_vec(rows[i], r, m)
        inv = pow(divisor.p, -1, m.p)
        out[i] = mul_red_vec(diff, inv, (inv << m.w) // m.p, m)
    return out


def floor_rns(c: RnsPoly) -> RnsPoly:
    """Divide by the special modulus, dropping its row."""
    if not c.special:
        raise CkksError("missing special row")
    if c.domain != NTT:
        raise CkksError("domain mismatch: floor expects NTT form")
    rows = _floor_rows(c.residues, c.moduli, c.basis.special, c.basis, c.level)
    return RnsPoly(rows, c.basis, c.level, NTT, special=False)


def key_switch(ct: Ciphertext, ksk: KeySwitchKey, params: HeParams | None = None) -> Ciphertext:
    """Switch a two-component ciphertext to the key encoded in ``ksk``."""
    if len(ct) != 2:
        raise CkksError("key switching expects a 2-component ciphertext")
    c0, c1 = ct.components
    basis = ct.basis
    if ksk.basis != basis:
        raise CkksError("ksk basis mismatch")
    level = ct.level
    if level > ksk.level:
        raise CkksError("level mismatch")
    n = basis.n
    special = basis.special
    # ksk residue index for each accumulator row: 0..level, then the special row
    ksk_rows = list(range(level + 1)) + [ksk.level + 1]
    acc_moduli = basis.row_moduli(level) + (special,)
    acc = np.zeros((2, level + 2, n), dtype=np.uint64)
    for i in range(level + 1):
        a = ntt_inverse(c1.residues[i], basis.table(acc_moduli[i]))
        for j, m in enumerate(acc_moduli):
            if j == i:
                b = c1.residues[i]
            else:
                b = ntt_forward(reduce_row(a, m), basis.table(m))
            kr = ksk_rows[j]
            for col, d in enumerate((ksk.d0, ksk.d1)):
                prod = mul_red_vec(b, d[i].residues[kr], ksk.shoup(col, i)[kr], m)
                acc[col, j] = add_mod_vec(acc[col, j], prod, m)
    out0 = _floor_rows(acc[0], acc_moduli, special, basis, level)
    out1 = _floor_rows(acc[1], acc_moduli, special, basis, level)
    moduli = basis.row_moduli(level)
    out0 = np.stack([add_mod_vec(c0.residues[i], out0[i], m) for i, m in enumerate(moduli)])
    return Ciphertext([RnsPoly(out0, basis, level, NTT), RnsPoly(out1, basis, level, NTT)],
                      ct.scale)


def relinearize(ct: Ciphertext, rlk: KeySwitchKey, params: HeParams | None = None) -> Ciphertext:
    if len(ct) != 3:
        raise CkksError(f"relinearization expects 3 components, got {len(ct)}")
    c0, c1, c2 = ct.components
    ks = key_switch(Ciphertext([zeros(ct.basis, ct.level, NTT), c2], ct.scale), rlk)
    return Ciphertext([rns_add(c0, ks.components[0]), rns_add(c1, ks.components[1])], ct.scale)


def rescale(ct: Ciphertext, params: HeParams | None = None) -> Ciphertext:
    """Divide by the last ciphertext prime and drop one level."""
    level = ct.level
    if level < 1:
        raise CkksError("level exhausted")
    basis = ct.basis
    last = basis.moduli[level]
    comps = []
    for c in ct.components:
        rows = _floor_rows(c.residues, c.moduli, last, basis, level - 1)
        comps.append(RnsPoly(rows, basis, level - 1, NTT))
    return Ciphertext(comps, ct.scale / last.p)


# ---------------------------------------------------------------------------
# automorphisms
# ---------------------------------------------------------------------------

def galois_element(steps: int, n: int) -> int:
    return pow(5, steps, 2 * n)


_PERM_CACHE: dict = {}


def galois_permutation(n: int, g: int) -> np.ndarray:
    """Index map with ``out[k] = in[perm[k]]`` for ``X -> X^g`` on NTT slots."""
    key = (n, g)
    if key not in _PERM_CACHE:
        rev = bit_reverse_indices(n)
        exps = 2 * rev + 1                      # slot k evaluates at psi^exps[k]
        slot_of = np.empty(2 * n, dtype=np.int64)
        slot_of[exps] = np.arange(n)
        _PERM_CACHE[key] = slot_of[(exps * g) % (2 * n)]
    return _PERM_CACHE[key]


def apply_galois_poly(x: RnsPoly, g: int) -> RnsPoly:
    if g % 2 == 0:
        raise CkksError("even galois element")
    g %= 2 * x.n
    if x.domain == NTT:
        perm = galois_permutation(x.n, g)
        return RnsPoly(x.residues[:, perm], x.basis, x.level, NTT, x.special)
    # coefficient form: X^i -> +-X^(i*g mod n)
    n = x.n
    idx = (np.arange(n) * g) % (2 * n)
    dest = idx % n
    flip = idx >= n
    out = np.zeros_like(x.residues)
    for r, (row, m) in enumerate(zip(x.residues, x.moduli)):
        vals = np.where(flip & (row != 0), np.uint64(m.p) - row, row)
        out[r, dest] = vals
    return RnsPoly(out, x.basis, x.level, COEFF, x.special)


def apply_galois(ct: Ciphertext, g: int) -> Ciphertext:
    return Ciphertext([apply_galois_poly(c, g) for c in ct.components], ct.scale)


def galois_keygen(sk: SecretKey, params: HeParams, g: int,
                  rng: np.random.Generator) -> KeySwitchKey:
    ksk = ksk_gen(apply_galois_poly(sk.s, g), sk, params, rng)
    ksk.galois = g
    return ksk


def rotate(ct: Ciphertext, steps: int, galois_ksk: KeySwitchKey,
           params: HeParams | None = None) -> Ciphertext:
    g = galois_element(steps, ct.basis.n)
    return key_switch(apply_galois(ct, g), galois_ksk)


def automorphism_coeffs(m, g: int) -> list[int]:
    """Plain integer image of ``m(X) -> m(X^g) mod X^n + 1``."""
    n = len(m)
    out = [0] * n
    for i, c in enumerate(m):
        e = (i * g) % (2 * n)
        if e >= n:
            out[e - n] -= int(c)
        else:
            out[e] += int(c)
    return out

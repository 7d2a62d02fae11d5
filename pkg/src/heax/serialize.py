"""Binary container for parameters, keys, ciphertexts and plaintexts.

Layout, all integers little-endian::

    magic "HEAX" | version u8 | kind u8 | log2(n) u8 | count u8
    moduli u64 * count          (ciphertext primes, then the special prime)
    level u8 | components u8 | flags u8 | scale f64
    residue rows u64 * n, per row, per component

``flags`` bit 0 marks NTT form, bit 1 marks a trailing special-modulus row.
The scale field carries sigma for parameter files and the Galois element
for rotation keys.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .ckks import Ciphertext, HeParams, KeySwitchKey, SecretKey, params_from_basis
from .modarith import Modulus
from .rns import COEFF, NTT, RnsBasis, RnsPoly

MAGIC = b"HEAX"
VERSION = 1

KIND_PARAMS, KIND_SECRET_KEY, KIND_KSK, KIND_CIPHERTEXT, KIND_PLAINTEXT = range(5)
KIND_NAMES = {KIND_PARAMS: "params", KIND_SECRET_KEY: "secret_key", KIND_KSK: "ksk",
              KIND_CIPHERTEXT: "ciphertext", KIND_PLAINTEXT: "plaintext"}

FLAG_NTT = 1
FLAG_SPECIAL = 2

_HEAD = struct.Struct("<4sBBBB")
_TAIL = struct.Struct("<BBBd")


class SerializationError(ValueError):
    pass


class BadMagicError(SerializationError):
    pass


class BadVersionError(SerializationError):
    pass


class ResidueRangeError(SerializationError):
    pass


class KindMismatchError(SerializationError):
    pass


@dataclass(eq=False)
class Record:
    """Decoded container before it is turned into a typed object."""

    kind: int
    basis: RnsBasis
    level: int
    flags: int
    scale: float
    polys: list[RnsPoly]


@dataclass(eq=False)
class Plaintext:
    poly: RnsPoly
    scale: float = 1.0


def _encode(kind: int, basis: RnsBasis, level: int, flags: int, scale: float,
            polys: list[RnsPoly]) -> bytes:
    moduli = [m.p for m in basis.moduli]
    if basis.special is not None:
        moduli.append(basis.special.p)
    parts = [_HEAD.pack(MAGIC, VERSION, kind, basis.n.bit_length() - 1, len(moduli)),
             np.asarray(moduli, dtype="<u8").tobytes(),
             _TAIL.pack(level, len(polys), flags, float(scale))]
    for p in polys:
        parts.append(np.ascontiguousarray(p.residues, dtype="<u8").tobytes())
    return b"".join(parts)


def _poly_flags(p: RnsPoly) -> int:
    return (FLAG_NTT if p.domain == NTT else 0) | (FLAG_SPECIAL if p.special else 0)


def decode(data: bytes) -> Record:
    if len(data) < _HEAD.size:
        raise SerializationError("truncated header")
    magic, version, kind, log_n, count = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    if kind not in KIND_NAMES:
        raise SerializationError(f"unknown kind {kind}")
    off = _HEAD.size
    if count < 2:
        raise SerializationError("need at least one prime plus the special prime")
    if len(data) < off + 8 * count + _TAIL.size:
        raise SerializationError("truncated header")
    moduli = np.frombuffer(data, dtype="<u8", count=count, offset=off)
    off += 8 * count
    level, ncomp, flags, scale = _TAIL.unpack_from(data, off)
    off += _TAIL.size
    n = 1 << log_n
    try:
        ms = [Modulus(int(p)) for p in moduli]
        basis = RnsBasis(ms[:-1], n, special=ms[-1])
    except ValueError as exc:
        raise SerializationError(f"invalid moduli: {exc}") from exc
    if level > basis.max_level:
        raise SerializationError(f"level {level} exceeds basis")
    special = bool(flags & FLAG_SPECIAL)
    rows = level + 1 + int(special)
    need = off + ncomp * rows * n * 8
    if len(data) != need:
        raise SerializationError(f"expected {need} bytes, got {len(data)}")
    domain = NTT if flags & FLAG_NTT else COEFF
    polys = []
    row_moduli = np.array([m.p for m in basis.row_moduli(level, special)], dtype=np.uint64)
    for _ in range(ncomp):
        res = np.frombuffer(data, dtype="<u8", count=rows * n, offset=off).reshape(rows, n)
        off += rows * n * 8
        if np.any(res >= row_moduli[:, None]):
            raise ResidueRangeError("residue not below its modulus")
        polys.append(RnsPoly(res.astype(np.uint64), basis, level, domain, special))
    return Record(kind, basis, level, flags, scale, polys)


# ---------------------------------------------------------------------------
# typed front end
# ---------------------------------------------------------------------------

def dumps(obj) -> bytes:
    if isinstance(obj, HeParams):
        return _encode(KIND_PARAMS, obj.basis, obj.max_level, 0, obj.error_sigma, [])
    if isinstance(obj, SecretKey):
        p = obj.s
        return _encode(KIND_SECRET_KEY, p.basis, p.level, _poly_flags(p), 0.0, [p])
    if isinstance(obj, KeySwitchKey):
        p = obj.d0[0]
        return _encode(KIND_KSK, p.basis, p.level, _poly_flags(p), float(obj.galois),
                       list(obj.d0) + list(obj.d1))
    if isinstance(obj, Ciphertext):
        p = obj.components[0]
        return _encode(KIND_CIPHERTEXT, p.basis, p.level, _poly_flags(p), obj.scale,
                       list(obj.components))
    if isinstance(obj, Plaintext):
        p = obj.poly
        return _encode(KIND_PLAINTEXT, p.basis, p.level, _poly_flags(p), obj.scale, [p])
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(data: bytes, expect: int | None = None):
    rec = decode(data)
    if expect is not None and rec.kind != expect:
        raise KindMismatchError(
            f"expected {KIND_NAMES[expect]}, found {KIND_NAMES[rec.kind]}")
    if rec.kind == KIND_PARAMS:
        return params_from_basis(rec.basis, error_sigma=rec.scale)
    if rec.kind == KIND_SECRET_KEY:
        return SecretKey(rec.polys[0])
    if rec.kind == KIND_KSK:
        if len(rec.polys) % 2:
            raise SerializationError("ksk needs an even component count")
        half = len(rec.polys) // 2
        return KeySwitchKey(rec.polys[:half], rec.polys[half:], galois=int(rec.scale))
    if rec.kind == KIND_CIPHERTEXT:
        return Ciphertext(rec.polys, rec.scale)
    return Plaintext(rec.polys[0], rec.scale)


def save(path, obj):
    with open(path, "wb") as f:
        f.write(dumps(obj))


def load(path, expect: int | None = None):
    with open(path, "rb") as f:
        return loads(f.read(), expect)

import json
from functools import lru_cache
from pathlib import Path

import numpy as np

from heax import ckks

BOUNDS_FILE = Path(__file__).with_name("noise_bounds.json")


def noise_bounds(name: str) -> dict:
    return json.loads(BOUNDS_FILE.read_text())[name.upper()]


@lru_cache(maxsize=None)
def keyset(name: str, seed: int = 11):
    params = ckks.named_params(name)
    rng = np.random.default_rng(seed)
    sk = ckks.keygen(params, rng)
    rlk = ckks.relin_keygen(sk, params, rng)
    return params, sk, rlk


def exact_product(m0, m1, delta: int, p_last: int) -> list[int]:
    """round(conv(m0, m1) * delta^2 / p_last) for small integer messages."""
    n = len(m0)
    full = np.convolve(np.asarray(m0, dtype=np.int64), np.asarray(m1, dtype=np.int64))
    neg = full[:n].copy()
    neg[:n - 1] -= full[n:]
    return [(2 * int(v) * delta * delta + p_last) // (2 * p_last) for v in neg]

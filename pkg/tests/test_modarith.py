import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heax.modarith import (
    Modulus,
    add_mod,
    add_mod_vec,
    barrett_reduce,
    barrett_reduce_vec,
    find_primitive_root,
    gen_ntt_primes,
    inv_mod,
    mul_mod_vec,
    mul_red,
    mul_red_vec,
    neg_mod_vec,
    pow_mod,
    precompute_shoup,
    shoup_vec,
    sub_mod,
    sub_mod_vec,
)

P17 = Modulus(17, 8)
BIG = gen_ntt_primes(1 << 14)[0]


def test_modulus_invariants():
    m = BIG
    assert m.barrett_u * m.p <= 1 << (2 * m.w) < (m.barrett_u + 1) * m.p
    assert m.p < 1 << (m.w - 2)


@pytest.mark.parametrize("p,w", [(15, 8), (67, 8), (17, 7), (17, 64)])
def test_modulus_rejects(p, w):
    with pytest.raises(ValueError):
        Modulus(p, w)


def test_barrett_examples():
    assert barrett_reduce(0, P17) == 0
    assert barrett_reduce(300, P17) == 11
    x = (BIG.p - 1) ** 2
    assert barrett_reduce(x, BIG) == x % BIG.p


def test_mul_red_examples():
    assert precompute_shoup(3, P17).y_shoup == 45
    assert precompute_shoup(16, P17).y_shoup == 240
    assert precompute_shoup(0, P17).y_shoup == 0
    assert mul_red(5, precompute_shoup(3, P17), P17) == 15
    assert mul_red(16, precompute_shoup(16, P17), P17) == 1
    for m in (P17, BIG):
        assert mul_red(7, precompute_shoup(1, m), m) == 7


def test_small_ops():
    assert add_mod(16, 16, P17) == 15
    assert sub_mod(0, 1, P17) == 16
    assert inv_mod(13, P17) == 4
    assert pow_mod(2, 4, P17) == 16
    with pytest.raises(ZeroDivisionError, match="not invertible"):
        inv_mod(0, P17)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, BIG.p - 1), st.integers(0, BIG.p - 1))
def test_mul_red_matches_oracle(x, y):
    sp = precompute_shoup(y, BIG)
    assert sp.y_shoup * BIG.p <= y << BIG.w < (sp.y_shoup + 1) * BIG.p
    assert mul_red(x, sp, BIG) == x * y % BIG.p == barrett_reduce(x * y, BIG)


def test_gen_ntt_primes():
    ps = gen_ntt_primes(4, 8, 2)
    assert [m.p for m in ps] == [41, 17]
    with pytest.raises(ValueError, match="insufficient primes"):
        gen_ntt_primes(4, 8, 30)
    big = gen_ntt_primes(1 << 12, 54, 5)
    vals = [m.p for m in big]
    assert vals == sorted(vals, reverse=True) and len(set(vals)) == 5
    assert all(v % (1 << 13) == 1 and v < 1 << 52 for v in vals)
    sized = gen_ntt_primes(1 << 12, 54, 2, max_bits=40, exclude={vals[0]})
    assert all(m.bits <= 40 for m in sized)


def test_primitive_root():
    assert find_primitive_root(P17, 4) == 2
    # 17 = 1 mod 16, so an order-16 root exists; order 32 does not
    psi = find_primitive_root(P17, 8)
    assert pow(psi, 8, 17) == 16
    with pytest.raises(ValueError):
        find_primitive_root(P17, 16)
    for n in (4, 1 << 10):
        m = gen_ntt_primes(n)[0]
        psi = find_primitive_root(m, n)
        assert pow(psi, n, m.p) == m.p - 1


def test_vector_kernels_match_scalar():
    rng = np.random.default_rng(0)
    for m in (P17, Modulus(241, 10), BIG, gen_ntt_primes(8, 40)[0]):
        x = rng.integers(0, m.p, 5000, dtype=np.uint64)
        y = rng.integers(0, m.p, 5000, dtype=np.uint64)
        xs, ys = x.tolist(), y.tolist()
        want = [a * b % m.p for a, b in zip(xs, ys)]
        assert mul_mod_vec(x, y, m).tolist() == want
        assert mul_red_vec(x, y, shoup_vec(y, m), m).tolist() == want
        assert shoup_vec(y, m).tolist() == [(b << m.w) // m.p for b in ys]
        assert add_mod_vec(x, y, m).tolist() == [(a + b) % m.p for a, b in zip(xs, ys)]
        assert sub_mod_vec(x, y, m).tolist() == [(a - b) % m.p for a, b in zip(xs, ys)]
        assert neg_mod_vec(x, m).tolist() == [(-a) % m.p for a in xs]
        z = rng.integers(0, 1 << m.w, 5000, dtype=np.uint64)
        assert barrett_reduce_vec(z, m).tolist() == [v % m.p for v in z.tolist()]


def test_mul_red_single_correction_asserted():
    # a wrong quotient breaks the z < 2p guarantee
    m = BIG
    x = random.Random(1).randrange(m.p)
    bad = precompute_shoup(5, m)
    from heax.modarith import ShoupPair
    with pytest.raises(AssertionError):
        mul_red(x, ShoupPair(5, bad.y_shoup + (1 << 20)), m)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heax.modarith import Modulus, gen_ntt_primes
from heax.ntt import (
    ButterflyCounter,
    NttTable,
    bit_reverse,
    bit_reverse_permutation,
    negacyclic_convolve_reference,
    ntt_forward,
    ntt_inverse,
    ntt_table,
)
from oracles import negacyclic_kronecker, negacyclic_mod_fast, ntt_direct

P17 = Modulus(17, 8)
T17 = NttTable.build(P17, 4, psi=2)


def test_table_layout():
    assert T17.psi_powers.tolist() == [1, 4, 2, 8]
    assert T17.psi_shoup.tolist() == [(y << 8) // 17 for y in [1, 4, 2, 8]]
    m = gen_ntt_primes(1 << 10)[0]
    t = ntt_table(m, 1 << 10)
    assert t.psi_powers[0] == 1
    assert int(t.psi_powers[1]) == pow(t.psi, 512, m.p)
    assert pow(t.psi, 1024, m.p) == m.p - 1
    assert t.n_inv * t.n % m.p == 1


def test_rejects_wrong_root():
    with pytest.raises(ValueError):
        NttTable.build(P17, 4, psi=4)


def test_small_example():
    out = ntt_forward([1, 1, 1, 1], T17)
    assert out.tolist() == ntt_direct([1, 1, 1, 1], 17, 2) == [15, 12, 7, 4]
    assert ntt_inverse(out, T17).tolist() == [1, 1, 1, 1]
    # a constant polynomial is a constant in every slot
    assert ntt_forward([3, 0, 0, 0], T17).tolist() == [3, 3, 3, 3]


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32])
def test_forward_matches_direct_sum(n):
    rng = np.random.default_rng(n)
    m = gen_ntt_primes(n, 30)[0]
    t = ntt_table(m, n)
    for _ in range(5):
        a = rng.integers(0, m.p, n, dtype=np.uint64)
        assert ntt_forward(a, t).tolist() == ntt_direct(a.tolist(), m.p, t.psi)


def test_batched_rows():
    m = gen_ntt_primes(64)[0]
    t = ntt_table(m, 64)
    rng = np.random.default_rng(3)
    a = rng.integers(0, m.p, (3, 5, 64), dtype=np.uint64)
    fa = ntt_forward(a, t)
    assert np.array_equal(fa[2, 4], ntt_forward(a[2, 4], t))
    assert np.array_equal(ntt_inverse(fa, t), a)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_convolution_property(logn, seed):
    n = 1 << logn
    m = gen_ntt_primes(n)[0]
    t = ntt_table(m, n)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, m.p, n, dtype=np.uint64)
    b = rng.integers(0, m.p, n, dtype=np.uint64)
    fa, fb = ntt_forward(a, t), ntt_forward(b, t)
    prod = [x * y % m.p for x, y in zip(fa.tolist(), fb.tolist())]
    got = ntt_inverse(np.array(prod, dtype=np.uint64), t).tolist()
    assert got == negacyclic_convolve_reference(a, b, m) == negacyclic_mod_fast(a, b, m.p)


def test_linearity():
    n = 256
    m = gen_ntt_primes(n)[0]
    t = ntt_table(m, n)
    rng = np.random.default_rng(7)
    a = rng.integers(0, m.p, n, dtype=np.uint64)
    b = rng.integers(0, m.p, n, dtype=np.uint64)
    alpha = 123456789
    lhs = ntt_forward([(alpha * int(x) + int(y)) % m.p for x, y in zip(a, b)], t)
    fa, fb = ntt_forward(a, t).tolist(), ntt_forward(b, t).tolist()
    assert lhs.tolist() == [(alpha * x + y) % m.p for x, y in zip(fa, fb)]
    # inverse is linear as well
    s = [(x + y) % m.p for x, y in zip(fa, fb)]
    ia, ib = ntt_inverse(fa, t).tolist(), ntt_inverse(fb, t).tolist()
    assert ntt_inverse(s, t).tolist() == [(x + y) % m.p for x, y in zip(ia, ib)]


@pytest.mark.parametrize("n", [4, 64, 4096])
def test_butterfly_count(n):
    t = ntt_table(gen_ntt_primes(n)[0], n)
    c = ButterflyCounter()
    ntt_forward(np.zeros(n, dtype=np.uint64), t, counter=c)
    assert c.count == n // 2 * (n.bit_length() - 1)
    c2 = ButterflyCounter()
    ntt_inverse(np.zeros(n, dtype=np.uint64), t, counter=c2)
    assert c2.count == c.count


def test_reference_ring_relations():
    m = P17
    n = 4
    b = [3, 5, 7, 11]
    assert negacyclic_convolve_reference([1, 0, 0, 0], b, m) == b
    assert negacyclic_convolve_reference([0, 1, 0, 0], [0, 0, 0, 1], m) == [16, 0, 0, 0]
    rng = np.random.default_rng(1)
    a = rng.integers(-50, 50, n).tolist()
    c = rng.integers(-50, 50, n).tolist()
    assert negacyclic_convolve_reference(a, c, m) == [v % 17 for v in negacyclic_kronecker(a, c)]


def test_bit_reverse():
    assert bit_reverse_permutation(["a", "b", "c", "d"]) == ["a", "c", "b", "d"]
    assert bit_reverse(3, 3) == 6 and bit_reverse(6, 3) == 3
    v = np.arange(64)
    assert np.array_equal(bit_reverse_permutation(bit_reverse_permutation(v)), v)
    with pytest.raises(ValueError):
        bit_reverse_permutation([1, 2, 3])

import numpy as np
import pytest

from heax.modarith import gen_ntt_primes
from heax.ntt import ntt_forward, ntt_table
from heax.sim.banked import (
    ROUTE_MUX,
    TYPE1,
    BankConflictError,
    BankedMemoryModel,
    banked_ntt_schedule,
    check_coverage,
    mux_fan_in,
    simulate_banked_ntt,
    type1_stage_count,
)


def test_first_step_example():
    sch = banked_ntt_schedule(4096, 8)
    st = sch[0]
    assert st.stage == 0 and st.step == 0 and st.kind == TYPE1
    assert st.pairs[:, 0].tolist() == list(range(8))
    assert st.pairs[:, 1].tolist() == list(range(2048, 2056))
    assert st.me_pair == (0, 256)
    assert type1_stage_count(4096, 8) == 8
    assert len(sch) == 3072
    assert sum(1 for s in sch if s.kind == TYPE1) == 8 * 4096 // 16


@pytest.mark.parametrize("n,nc", [(16, 1), (16, 2), (16, 8), (64, 4), (256, 16), (1024, 8)])
def test_schedule_properties(n, nc):
    sch = banked_ntt_schedule(n, nc)
    assert check_coverage(sch, n)
    assert len(sch) == n * (n.bit_length() - 1) // (2 * nc)
    assert mux_fan_in(sch, nc) <= max(1, nc.bit_length() - 1)
    # every step touches one row: one read per bank per cycle by construction
    assert all(len(s.pairs) == nc for s in sch)


def test_mux_positions_closed_form():
    nc = 16
    for st in banked_ntt_schedule(512, nc):
        if st.route != ROUTE_MUX:
            continue
        t = int(st.pairs[0, 1] - st.pairs[0, 0])
        s = t.bit_length() - 1
        lanes = np.arange(nc)
        expect = (lanes & (t - 1)) + ((lanes >> s) << (s + 1))
        assert np.array_equal(st.slots(2 * nc)[:, 0], expect)
        assert np.array_equal(st.slots(2 * nc)[:, 1], expect + t)


@pytest.mark.parametrize("n", [8, 32, 256])
def test_simulator_small(n):
    m = gen_ntt_primes(n)[0]
    t = ntt_table(m, n)
    rng = np.random.default_rng(n)
    nc = 1
    while 2 * nc <= n:
        a = rng.integers(0, m.p, n, dtype=np.uint64)
        r = simulate_banked_ntt(a, t, nc)
        assert np.array_equal(r.output, ntt_forward(a, t))
        assert r.steps == n * (n.bit_length() - 1) // (2 * nc)
        assert r.reads == r.steps and r.writes == r.steps
        nc *= 2


def test_degenerate_half_cores():
    n = 64
    t = ntt_table(gen_ntt_primes(n)[0], n)
    r = simulate_banked_ntt(np.arange(n, dtype=np.uint64), t, n // 2)
    assert r.steps == 6 and np.array_equal(r.output, ntt_forward(np.arange(n), t))


def test_cycle_fill_bound():
    n = 4096
    t = ntt_table(gen_ntt_primes(n)[0], n)
    r = simulate_banked_ntt(np.ones(n, dtype=np.uint64), t, 8)
    assert r.stalls == 0
    assert 3072 < r.cycles <= 3072 + 64


def test_invalid_core_count():
    with pytest.raises(ValueError, match="invalid core count"):
        banked_ntt_schedule(64, 3)
    with pytest.raises(ValueError, match="invalid core count"):
        banked_ntt_schedule(64, 64)


def test_port_discipline_enforced():
    mem = BankedMemoryModel(4, 4)
    mem.read(0, 1)
    with pytest.raises(BankConflictError, match="bank conflict"):
        mem.read(0, 2)
    mem.write(1, 0, np.zeros(4, dtype=np.uint64))
    with pytest.raises(BankConflictError):
        mem.write(1, 3, np.zeros(4, dtype=np.uint64))
    # read of a row before its write lands is a hazard
    mem.write(5, 2, np.ones(4, dtype=np.uint64))
    with pytest.raises(RuntimeError):
        mem.read(4, 2)
    assert mem.read(6, 2).tolist() == [1, 1, 1, 1]

"""Banked-memory NTT dataflow: schedule generation and a cycle-counting simulator.

The polynomial lives in ``2*nc`` parallel banks; one row across all banks is a
doubled memory element holding ``2*nc`` consecutive coefficients, so
coefficient ``x`` sits at row ``x // (2*nc)`` and bank ``x % (2*nc)``. Each
bank serves one read and one write per cycle.

Stages whose butterfly distance ``t`` is at least ``2*nc`` pair coefficients
from two different rows (Type 1); later stages pair them inside one row
(Type 2). The ``t == nc`` stage takes slots ``l`` and ``l + nc``, the same two
candidates Type-1 steps already select from, so only the ``t < nc`` stages
need the reordering multiplexers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..modarith import add_mod_vec, mul_red_vec, sub_mod_vec
from ..ntt import NttTable
from .model import CoreCosts, is_pow2

WRITE_LATENCY = 2
TYPE1, TYPE2 = 1, 2
ROUTE_FIXED, ROUTE_MUX = "fixed", "mux"


class BankConflictError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ScheduleStep:
    """One read cycle of the NTT module.

    ``pairs[l]`` are the coefficient indices fed to core ``l`` and
    ``twiddles[l]`` its index into the ``psi^brv`` table. ``operand_rows`` are
    the rows holding the a- and b-inputs; ``write_rows`` are rows whose
    butterflies are all done once this step has been issued.
    """

    stage: int
    step: int
    kind: int
    route: str
    read_row: int
    operand_rows: tuple[int, int]
    write_rows: tuple[int, ...]
    pairs: np.ndarray
    twiddles: np.ndarray
    me_pair: tuple[int, int]

    def slots(self, width: int) -> np.ndarray:
        """Positions of each core's a/b inputs inside their doubled MEs."""
        return self.pairs % width


def _check_shape(n: int, nc: int):
    if not is_pow2(n) or not is_pow2(nc) or 2 * nc > n:
        raise ValueError(f"invalid core count: nc={nc} for n={n} "
                         "(both powers of two, 2*nc <= n)")


def type1_stage_count(n: int, nc: int) -> int:
    _check_shape(n, nc)
    return (n.bit_length() - 1) - (nc.bit_length() - 1) - 1


def banked_ntt_schedule(n: int, nc: int) -> list[ScheduleStep]:
    _check_shape(n, nc)
    width = 2 * nc
    rows = n // width
    lanes = np.arange(nc, dtype=np.int64)
    out = []
    t, groups, stage = n // 2, 1, 0
    while t >= 1:
        if t >= width:
            d = t // width
            row_pairs = [r for r in range(rows) if (r * width) % (2 * t) < t]
            for q, ra in enumerate(row_pairs):
                rb = ra + d
                for h in (0, 1):
                    ia = ra * width + lanes + h * nc
                    pairs = np.stack([ia, ia + t], axis=1)
                    out.append(ScheduleStep(
                        stage, 2 * q + h, TYPE1, ROUTE_FIXED,
                        read_row=ra if h == 0 else rb,
                        operand_rows=(ra, rb),
                        write_rows=(ra, rb) if h == 1 else (),
                        pairs=pairs, twiddles=groups + ia // (2 * t),
                        me_pair=(int(ia[0]) // nc, int(ia[0] + t) // nc)))
        else:
            s = t.bit_length() - 1
            pos_a = (lanes & (t - 1)) + ((lanes >> s) << (s + 1))
            route = ROUTE_FIXED if t == nc else ROUTE_MUX
            for r in range(rows):
                ia = r * width + pos_a
                out.append(ScheduleStep(
                    stage, r, TYPE2, route, read_row=r, operand_rows=(r, r),
                    write_rows=(r,), pairs=np.stack([ia, ia + t], axis=1),
                    twiddles=groups + ia // (2 * t), me_pair=(2 * r, 2 * r)))
        t //= 2
        groups *= 2
        stage += 1
    return out


def mux_fan_in(schedule: list[ScheduleStep], nc: int) -> int:
    """Largest number of distinct ME slots any core input draws from in MUX stages."""
    width = 2 * nc
    srcs: dict[tuple[int, int], set] = {}
    for st in schedule:
        if st.route != ROUTE_MUX:
            continue
        for lane, (sa, sb) in enumerate(st.slots(width)):
            srcs.setdefault((lane, 0), set()).add(int(sa))
            srcs.setdefault((lane, 1), set()).add(int(sb))
    return max((len(v) for v in srcs.values()), default=0)


def check_coverage(schedule: list[ScheduleStep], n: int) -> bool:
    """Every coefficient appears exactly once per stage."""
    by_stage: dict[int, list] = {}
    for st in schedule:
        by_stage.setdefault(st.stage, []).append(st.pairs.ravel())
    if len(by_stage) != n.bit_length() - 1:
        return False
    for chunks in by_stage.values():
        idx = np.sort(np.concatenate(chunks))
        if len(idx) != n or np.any(idx != np.arange(n)):
            return False
    return True


class BankedMemoryModel:
    """``banks`` parallel single-port-read, single-port-write memories."""

    def __init__(self, banks: int, depth: int):
        self.banks = banks
        self.depth = depth
        self.data = np.zeros((depth, banks), dtype=np.uint64)
        self._ports: dict[int, np.ndarray] = {}   # cycle -> [reads, writes] per bank
        self._landing: dict[int, int] = {}         # row -> cycle its pending write lands
        self.reads = 0
        self.writes = 0

    def _claim(self, cycle: int, port: int, row: int):
        if not 0 <= row < self.depth:
            raise IndexError(f"row {row} out of range")
        use = self._ports.get(cycle)
        if use is None:
            use = self._ports[cycle] = np.zeros((2, self.banks), dtype=np.int64)
        use[port] += 1
        if use[port].max() > 1:
            kind = "read" if port == 0 else "write"
            raise BankConflictError(f"bank conflict: two {kind}s in cycle {cycle}")

    def ready_at(self, row: int) -> int:
        """First cycle at which ``row`` may be read without a hazard."""
        return self._landing.get(row, -1) + 1

    def read(self, cycle: int, row: int) -> np.ndarray:
        if cycle < self.ready_at(row):
            raise RuntimeError(f"row {row} read before its write lands")
        self._claim(cycle, 0, row)
        self.reads += 1
        return self.data[row].copy()

    def write(self, cycle: int, row: int, values: np.ndarray):
        self._claim(cycle, 1, row)
        self.writes += 1
        self.data[row] = values
        self._landing[row] = cycle

    def retire(self, before: int):
        for c in [c for c in self._ports if c < before]:
            del self._ports[c]


@dataclass
class SimResult:
    output: np.ndarray
    steps: int
    stalls: int
    fill: int
    cycles: int
    reads: int
    writes: int


def simulate_banked_ntt(a, table: NttTable, nc: int,
                        core_stages: int = CoreCosts().ntt.stages) -> SimResult:
    """Run the forward NTT of ``a`` through the banked dataflow.

    Cycles are ``steps + stalls + fill`` where ``fill`` covers the register
    write-back and the core pipeline depth; stalls only appear when a row is
    needed before its previous write lands (very small ``n / nc``).
    """
    n = table.n
    schedule = banked_ntt_schedule(n, nc)
    width = 2 * nc
    m = table.m
    mem = BankedMemoryModel(width, n // width)
    mem.data[:] = np.asarray(a, dtype=np.uint64).reshape(n // width, width)

    regs: dict[int, np.ndarray] = {}
    read_cycle: dict[int, int] = {}
    waiting: list[ScheduleStep] = []
    cycle, stalls = 0, 0
    for st in schedule:
        ready = mem.ready_at(st.read_row)
        if ready > cycle:
            stalls += ready - cycle
            cycle = ready
        regs[st.read_row] = mem.read(cycle, st.read_row)
        read_cycle[st.read_row] = cycle
        waiting.append(st)
        still = []
        for w in waiting:
            ra, rb = w.operand_rows
            if ra in regs and rb in regs:
                _butterflies(w, regs, table, width, m)
            else:
                still.append(w)
        waiting = still
        for row in st.write_rows:
            mem.write(read_cycle[row] + WRITE_LATENCY, row, regs.pop(row))
        mem.retire(cycle - 1)
        cycle += 1
    if waiting or regs:
        raise RuntimeError("schedule left butterflies unissued")
    fill = WRITE_LATENCY + core_stages
    return SimResult(mem.data.reshape(n).copy(), len(schedule), stalls, fill,
                     len(schedule) + stalls + fill, mem.reads, mem.writes)


def _butterflies(st: ScheduleStep, regs, table: NttTable, width: int, m):
    ra, rb = st.operand_rows
    sa = st.pairs[:, 0] % width
    sb = st.pairs[:, 1] % width
    u = regs[ra][sa]
    y = table.psi_powers[st.twiddles]
    ys = table.psi_shoup[st.twiddles]
    v = mul_red_vec(regs[rb][sb], y, ys, m)
    regs[ra][sa] = add_mod_vec(u, v, m)
    regs[rb][sb] = sub_mod_vec(u, v, m)

"""Closed-form throughput, buffer, resource and bandwidth model of the accelerator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction


def is_pow2(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def next_pow2(x: int) -> int:
    return 1 << max(0, math.ceil(x) - 1).bit_length()


def round_half_up(x) -> int:
    return math.floor(Fraction(x) + Fraction(1, 2))


@dataclass(frozen=True)
class CoreCost:
    dsp: int
    reg: int
    alm: int
    stages: int


@dataclass(frozen=True)
class CoreCosts:
    dyadic: CoreCost = CoreCost(22, 4526, 1663, 23)
    ntt: CoreCost = CoreCost(10, 6297, 2066, 50)
    intt: CoreCost = CoreCost(10, 5449, 2119, 49)


@dataclass(frozen=True)
class Device:
    name: str
    freq_hz: float
    dsp: int
    reg: int
    alm: int
    m20k: int
    shell: CoreCost          # stages unused
    dram_channels: int


DEVICES = {
    "arria10": Device("arria10", 275e6, 1518, 1_710_000, 427_000, 2_700,
                      CoreCost(1, 79203, 39222, 0), 2),
    "stratix10": Device("stratix10", 300e6, 5760, 3_730_000, 933_000, 11_700,
                        CoreCost(2, 86984, 45612, 0), 4),
}


@dataclass(frozen=True)
class HeaxConfig:
    """One instance of the key-switching pipeline plus the standalone MULT module.

    Module instance counts: one INTT0, ``m0`` NTT0, ``m0 + 1`` Dyadic, and two
    each of INTT1, NTT1 and MS (one per key column).
    """

    n: int
    k: int
    m0: int
    nc_intt0: int
    nc_ntt0: int
    nc_dyd: int
    nc_intt1: int
    nc_ntt1: int
    nc_ms: int
    mult_cores: int = 16
    freq_hz: float = 300e6
    f1: int = 0
    f2: int = 0
    device: str | None = None
    modules: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.modules is None:
            object.__setattr__(self, "modules", {
                "intt0": 1, "ntt0": self.m0, "dyad": self.m0 + 1,
                "intt1": 2, "ntt1": 2, "ms": 2})

    @property
    def log_n(self) -> int:
        return self.n.bit_length() - 1

    def pipeline(self) -> str:
        md = self.modules
        parts = [("INTT", md["intt0"], self.nc_intt0), ("NTT", md["ntt0"], self.nc_ntt0),
                 ("Dyad", md["dyad"], self.nc_dyd), ("INTT", md["intt1"], self.nc_intt1),
                 ("NTT", md["ntt1"], self.nc_ntt1), ("MS", md["ms"], self.nc_ms)]
        return " -> ".join(f"{c}x{name}({nc})" for name, c, nc in parts)


def derive_config(n: int, k: int, nc_intt0: int, m0: int, freq_hz: float = 300e6,
                  mult_cores: int = 16, device: str | None = None) -> HeaxConfig:
    """Balance every module of the key-switching pipeline against INTT0.

    The Dyadic and MS core counts are rounded up to powers of two after the
    throughput ceilings. The MS rate is sized against NTT0, which never
    falls below the NTT1-based minimum since ``m0 <= k``.
    """
    if not is_pow2(n) or n < 4:
        raise ValueError(f"ring degree must be a power of two, got {n}")
    if k < 1 or nc_intt0 < 1 or m0 < 1:
        raise ValueError("k, nc_intt0 and m0 must be positive")
    if (k * nc_intt0) % m0:
        raise ValueError("indivisible configuration: m0 must divide k * nc_intt0")
    log_n = n.bit_length() - 1
    nc_ntt0 = k * nc_intt0 // m0
    nc_dyd = next_pow2(math.ceil(Fraction(4 * nc_ntt0, log_n)))
    nc_intt1 = math.ceil(Fraction(nc_intt0, k))
    nc_ntt1 = nc_intt0
    nc_ms = next_pow2(math.ceil(Fraction(2 * nc_ntt0, log_n)))
    for nc in (nc_intt0, nc_ntt0, nc_intt1, nc_ntt1):
        if 2 * nc > n:
            raise ValueError(f"core count {nc} exceeds n/2")
    cfg = HeaxConfig(n, k, m0, nc_intt0, nc_ntt0, nc_dyd, nc_intt1, nc_ntt1, nc_ms,
                     mult_cores, freq_hz, device=device)
    f1, f2 = buffer_depths(cfg)
    return replace(cfg, f1=f1, f2=f2)


# the four published instantiations: (device, set) -> (n, k, nc_intt0, m0)
REFERENCE_CONFIGS = {
    ("arria10", "A"): (1 << 12, 2, 8, 2),
    ("stratix10", "A"): (1 << 12, 2, 16, 2),
    ("stratix10", "B"): (1 << 13, 4, 16, 4),
    ("stratix10", "C"): (1 << 14, 8, 8, 4),
}


def reference_config(device: str, param_set: str) -> HeaxConfig:
    key = (device.lower(), param_set.upper().removeprefix("SET-"))
    if key not in REFERENCE_CONFIGS:
        raise KeyError(f"no reference configuration for {key}")
    n, k, nc, m0 = REFERENCE_CONFIGS[key]
    return derive_config(n, k, nc, m0, DEVICES[key[0]].freq_hz, device=key[0])


def buffer_depths(cfg: HeaxConfig) -> tuple[int, int]:
    """Input-polynomial buffers ``f1`` and Dyadic-output buffers ``f2``."""
    f1 = math.ceil(3 + Fraction(cfg.nc_intt0, cfg.nc_ntt0))
    f2 = math.ceil(1 + cfg.m0 * Fraction(cfg.nc_intt1, cfg.nc_ntt1)
                   + Fraction(cfg.nc_intt1 * cfg.log_n, cfg.nc_ms))
    return f1, f2


# ---------------------------------------------------------------------------
# cycles and throughput
# ---------------------------------------------------------------------------

def ntt_cycles(n: int, nc: int) -> int:
    if 2 * nc > n:
        raise ValueError("nc must not exceed n/2")
    log_n = n.bit_length() - 1
    return n * log_n // (2 * nc)


def dyadic_cycles(n: int, nc: int, key_sets: int = 1) -> int:
    if nc < 1:
        raise ValueError("nc must be positive")
    return key_sets * n // nc


def keyswitch_interval(cfg: HeaxConfig) -> int:
    """Cycles between successive key switches entering the pipeline."""
    return cfg.k * ntt_cycles(cfg.n, cfg.nc_intt0)


def keyswitch_throughput(cfg: HeaxConfig) -> int:
    return round_half_up(Fraction(cfg.freq_hz) / keyswitch_interval(cfg))


def mul_relin_throughput(cfg: HeaxConfig) -> int:
    # MULT overlaps with the key-switching pipeline
    return keyswitch_throughput(cfg)


def lowlevel_cycles(cfg: HeaxConfig, op: str) -> int:
    if op in ("ntt", "intt"):
        # standalone transforms reuse the NTT0 modules
        return ntt_cycles(cfg.n, cfg.nc_ntt0)
    if op == "dyadic":
        return dyadic_cycles(cfg.n, cfg.mult_cores)
    raise ValueError(f"unknown low-level op {op!r}")


def lowlevel_throughput(cfg: HeaxConfig, op: str) -> int:
    return round_half_up(Fraction(cfg.freq_hz) / lowlevel_cycles(cfg, op))


def ntt_aggregate_throughput(n: int, nc: int, modules: int, freq_hz: float) -> int:
    """Transforms per second from ``modules`` independent NTT modules."""
    return modules * round_half_up(Fraction(freq_hz) / ntt_cycles(n, nc))


# ---------------------------------------------------------------------------
# resources, memory, bandwidth
# ---------------------------------------------------------------------------

def core_counts(cfg: HeaxConfig) -> dict[str, int]:
    md = cfg.modules
    return {
        "ntt": md["ntt0"] * cfg.nc_ntt0 + md["ntt1"] * cfg.nc_ntt1,
        "intt": md["intt0"] * cfg.nc_intt0 + md["intt1"] * cfg.nc_intt1,
        # MS cores are costed as Dyadic cores
        "dyadic": md["dyad"] * cfg.nc_dyd + md["ms"] * cfg.nc_ms + cfg.mult_cores,
    }


def resource_estimate(cfg: HeaxConfig, costs: CoreCosts = CoreCosts(),
                      device: str | None = None) -> dict[str, int]:
    device = device or cfg.device
    if device not in DEVICES:
        raise ValueError(f"unknown device {device!r}; expected one of {sorted(DEVICES)}")
    shell = DEVICES[device].shell
    cc = core_counts(cfg)
    out = {}
    for res in ("dsp", "reg", "alm"):
        out[res] = (cc["ntt"] * getattr(costs.ntt, res)
                    + cc["intt"] * getattr(costs.intt, res)
                    + cc["dyadic"] * getattr(costs.dyadic, res)
                    + getattr(shell, res))
    return out


def utilization(resources: dict[str, int], device: str) -> dict[str, float]:
    d = DEVICES[device]
    return {r: resources[r] / getattr(d, r) for r in ("dsp", "reg", "alm")}


def bram_pack_utilization(beta: int, word_bits: int = 54, bram_width: int = 40) -> Fraction:
    """Fraction of M20K width used when ``beta`` words are packed side by side."""
    if beta < 1:
        raise ValueError("beta must be >= 1")
    used = beta * word_bits
    return Fraction(used, math.ceil(Fraction(used, bram_width)) * bram_width)


def ksk_size_bits(n: int, k: int, word_bits: int = 64) -> int:
    """Both key-switching key sets, ``k * (k + 1)`` length-``n`` vectors each."""
    return 2 * k * (k + 1) * n * word_bits


def ksk_bandwidth_required(n: int, k: int, keyswitch_ops_per_sec: float) -> float:
    """DRAM bytes per second needed to stream the keys once per key switch."""
    return ksk_size_bits(n, k) / 8 * keyswitch_ops_per_sec

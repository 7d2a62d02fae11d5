"""Estimation reports: nested dict, flat key=value text, and JSON."""
from __future__ import annotations

import json

from .model import (
    DEVICES,
    HeaxConfig,
    bram_pack_utilization,
    core_counts,
    dyadic_cycles,
    keyswitch_interval,
    keyswitch_throughput,
    ksk_bandwidth_required,
    ksk_size_bits,
    lowlevel_throughput,
    mul_relin_throughput,
    ntt_cycles,
    resource_estimate,
    utilization,
)

SECTIONS = ("config", "cycles", "throughput", "resources", "bandwidth")


def estimate(cfg: HeaxConfig, device: str | None = None) -> dict:
    device = device or cfg.device or "stratix10"
    res = resource_estimate(cfg, device=device)
    ks = keyswitch_throughput(cfg)
    bw = ksk_bandwidth_required(cfg.n, cfg.k, ks)
    return {
        "config": {
            "device": device, "n": cfg.n, "k": cfg.k, "m0": cfg.m0,
            "freq_hz": cfg.freq_hz, "nc_intt0": cfg.nc_intt0, "nc_ntt0": cfg.nc_ntt0,
            "nc_dyd": cfg.nc_dyd, "nc_intt1": cfg.nc_intt1, "nc_ntt1": cfg.nc_ntt1,
            "nc_ms": cfg.nc_ms, "mult_cores": cfg.mult_cores, "f1": cfg.f1, "f2": cfg.f2,
            "pipeline": cfg.pipeline(),
        },
        "cycles": {
            "intt0": ntt_cycles(cfg.n, cfg.nc_intt0),
            "ntt0": ntt_cycles(cfg.n, cfg.nc_ntt0),
            "intt1": ntt_cycles(cfg.n, cfg.nc_intt1),
            "ntt1": ntt_cycles(cfg.n, cfg.nc_ntt1),
            "dyadic_keyswitch": dyadic_cycles(cfg.n, cfg.nc_dyd, 2),
            "dyadic_mult": dyadic_cycles(cfg.n, cfg.mult_cores),
            "keyswitch_interval": keyswitch_interval(cfg),
        },
        "throughput": {
            "ntt": lowlevel_throughput(cfg, "ntt"),
            "intt": lowlevel_throughput(cfg, "intt"),
            "dyadic": lowlevel_throughput(cfg, "dyadic"),
            "keyswitch": ks,
            "mul_relin": mul_relin_throughput(cfg),
        },
        "resources": {
            **{k.upper(): v for k, v in res.items()},
            **{f"{k.upper()}_util": round(v, 4) for k, v in utilization(res, device).items()},
            **{f"cores_{k}": v for k, v in core_counts(cfg).items()},
        },
        "bandwidth": {
            "ksk_bits": ksk_size_bits(cfg.n, cfg.k),
            "ksk_bytes_per_s": bw,
            "ksk_gbps": round(bw / 1e9, 3),
            "dram_channels": DEVICES[device].dram_channels,
            "bram_pack_util_8": round(float(bram_pack_utilization(8)), 4),
        },
    }


def to_text(report: dict) -> str:
    """Flatten to ``section.key=value`` lines in schema order."""
    lines = []
    for sec in SECTIONS:
        for key, val in report[sec].items():
            lines.append(f"{sec}.{key}={val}")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)

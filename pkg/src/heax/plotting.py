"""Figures for estimate and bench reports, written straight to files."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .sim.model import CoreCosts

STYLE = {"font.size": 9, "axes.spines.top": False, "axes.spines.right": False}


def _figure(ncols=1, width=6.4, height=3.2) -> tuple[Figure, list]:
    fig = Figure(figsize=(width, height), layout="constrained")
    FigureCanvasAgg(fig)
    axes = fig.subplots(1, ncols, squeeze=False)[0]
    for ax in axes:
        for k in ("top", "right"):
            ax.spines[k].set_visible(False)
        ax.tick_params(labelsize=STYLE["font.size"])
    return fig, list(axes)


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    return path


def plot_estimate(report: dict, out_dir, stem: str = "estimate") -> list[Path]:
    """Per-module cycles per polynomial and the DSP split across core types."""
    cyc = report["cycles"]
    names = ["intt0", "ntt0", "intt1", "ntt1", "dyadic_keyswitch", "keyswitch_interval"]
    fig, (ax0, ax1) = _figure(2, width=8.0)
    vals = [cyc[k] for k in names]
    ax0.barh(names, vals, color="0.4")
    ax0.set_xlabel("cycles")
    ax0.invert_yaxis()
    ax0.set_title("module latency per polynomial", fontsize=9)

    res = report["resources"]
    costs = CoreCosts()
    dsp = {
        "NTT": res["cores_ntt"] * costs.ntt.dsp,
        "INTT": res["cores_intt"] * costs.intt.dsp,
        "Dyadic/MS/MULT": res["cores_dyadic"] * costs.dyadic.dsp,
    }
    ax1.bar(list(dsp), list(dsp.values()), color=["0.25", "0.5", "0.75"])
    ax1.set_ylabel("DSP blocks")
    ax1.set_title(f"DSP total {res['DSP']} ({res['DSP_util']:.0%})", fontsize=9)
    cfg = report["config"]
    fig.suptitle(f"{cfg['device']}  n={cfg['n']}  k={cfg['k']}", fontsize=10)
    return [_save(fig, Path(out_dir) / f"{stem}.png")]


def plot_bench(rows: list[dict], out_dir, stem: str = "bench") -> list[Path]:
    """Host vs modeled accelerator throughput, log scale."""
    fig, (ax,) = _figure(1)
    ops = [r["op"] for r in rows]
    x = np.arange(len(ops))
    host = [r["host_ops_per_s"] for r in rows]
    heax = [r["heax_ops_per_s"] for r in rows]
    ax.bar(x - 0.2, host, 0.4, label="host (measured)", color="0.6")
    ax.bar(x + 0.2, heax, 0.4, label="HEAX (model)", color="0.2")
    ax.set_xticks(x, ops)
    ax.set_yscale("log")
    ax.set_ylabel("operations / s")
    ax.legend(frameon=False, fontsize=8)
    return [_save(fig, Path(out_dir) / f"{stem}.png")]


def plot_error_hist(errors, bound: float, path, title: str = "") -> Path:
    fig, (ax,) = _figure(1, width=5.0)
    ax.hist(np.asarray(errors, dtype=float), bins=40, color="0.5")
    ax.axvline(bound, color="k", lw=1, ls="--", label=f"bound {bound:g}")
    ax.set_xlabel("max |error| per trial")
    ax.set_ylabel("trials")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)

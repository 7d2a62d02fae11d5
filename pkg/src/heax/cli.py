"""``heax`` command-line front end."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import ckks
from .ckks import CkksError
from .ntt import ntt_forward, ntt_inverse
from .modarith import mul_red_vec, shoup_vec
from .rns import RnsError, to_rns
from .serialize import (
    KIND_CIPHERTEXT,
    KIND_KSK,
    KIND_PARAMS,
    KIND_PLAINTEXT,
    KIND_SECRET_KEY,
    MAGIC,
    SerializationError,
    load,
    loads,
    save,
)
from .sim import model
from .sim.banked import BankConflictError, simulate_banked_ntt
from .sim.report import estimate, to_json, to_text

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
# headroom bits kept between the default scale and the prime a rescale drops
SCALE_HEADROOM = 6


class CliError(Exception):
    pass


def _emit(lines: dict, fmt: str = "text", out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(lines, indent=2) + "\n")
    else:
        for k, v in lines.items():
            out.write(f"{k}={v}\n")


# ---------------------------------------------------------------------------
# keys and ciphertexts
# ---------------------------------------------------------------------------

def _params_from_args(args) -> ckks.HeParams:
    if args.set.lower() != "custom":
        return ckks.named_params(args.set)
    if not (args.n and args.k and args.log_qp):
        raise CliError("custom parameter set needs --n, --k and --log-qp")
    return ckks.make_params(args.n, args.k, args.log_qp)


def _parse_steps(text: str | None) -> list[int]:
    if not text:
        return []
    return [int(s) for s in text.replace(",", " ").split()]


def cmd_keygen(args) -> int:
    params = _params_from_args(args)
    rng = np.random.default_rng(args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sk = ckks.keygen(params, rng)
    rlk = ckks.relin_keygen(sk, params, rng)
    files = {"params": out / "params.heax", "secret_key": out / "sk.heax",
             "relin_key": out / "rlk.heax"}
    save(files["params"], params)
    save(files["secret_key"], sk)
    save(files["relin_key"], rlk)
    for steps in _parse_steps(args.rotations):
        g = ckks.galois_element(steps, params.n)
        path = out / f"gal_{steps}.heax"
        save(path, ckks.galois_keygen(sk, params, g, rng))
        files[f"galois_key_{steps}"] = path
    _emit({"n": params.n, "k": params.k, "moduli": [m.p for m in params.basis.moduli],
           "special": params.special.p, **{k: str(v) for k, v in files.items()}})
    return EXIT_OK


def _read_values(path: str) -> list[float]:
    text = Path(path).read_text()
    return [float(t) for t in text.replace(",", " ").split()]


def _load_message(path: str, params: ckks.HeParams, scale: float, level: int):
    raw = Path(path).read_bytes()
    if raw[:4] == MAGIC:
        pt = loads(raw, KIND_PLAINTEXT)
        return pt.poly, pt.scale
    vals = _read_values(path)
    if len(vals) > params.n:
        raise CliError(f"message has {len(vals)} values, ring holds {params.n}")
    coeffs = [int(np.rint(v * scale)) for v in vals] + [0] * (params.n - len(vals))
    return to_rns(coeffs, params.basis, level), scale


def cmd_encrypt(args) -> int:
    params = load(args.params, KIND_PARAMS)
    sk = load(args.sk, KIND_SECRET_KEY)
    level = params.max_level if args.level is None else args.level
    scale = args.scale
    if scale is None:
        scale = 2.0 ** (params.basis.moduli[level].bits - SCALE_HEADROOM)
    msg, scale = _load_message(args.input, params, scale, level)
    rng = np.random.default_rng(args.seed)
    ct = ckks.sym_enc(msg, sk, params, rng, level, scale=scale)
    save(args.out, ct)
    _emit({"out": args.out, "level": ct.level, "scale": ct.scale})
    return EXIT_OK


def cmd_decrypt(args) -> int:
    sk = load(args.sk, KIND_SECRET_KEY)
    ct = load(args.input, KIND_CIPHERTEXT)
    coeffs = ckks.decrypt(ct, sk)
    count = args.count or len(coeffs)
    if args.raw:
        body = "\n".join(str(c) for c in coeffs[:count])
    else:
        body = "\n".join(repr(c / ct.scale) for c in coeffs[:count])
    if args.out:
        Path(args.out).write_text(body + "\n")
    else:
        sys.stdout.write(body + "\n")
    return EXIT_OK


def cmd_eval(args) -> int:
    ct = load(args.input, KIND_CIPHERTEXT)
    op = args.op
    if op in ("add", "mul"):
        if not args.input2:
            raise CliError(f"{op} needs --in2")
        other = load(args.input2, KIND_CIPHERTEXT)
        res = ckks.hom_add(ct, other) if op == "add" else ckks.hom_mul(ct, other)
    elif op == "relin":
        if not args.rlk:
            raise CliError("relin needs --rlk")
        res = ckks.relinearize(ct, load(args.rlk, KIND_KSK))
    elif op == "rescale":
        res = ckks.rescale(ct)
    elif op == "rotate":
        if not args.gk:
            raise CliError("rotate needs --gk")
        gk = load(args.gk, KIND_KSK)
        g = ckks.galois_element(args.steps, ct.basis.n)
        if gk.galois != g:
            raise CliError(f"galois key is for element {gk.galois}, rotation needs {g}")
        res = ckks.rotate(ct, args.steps, gk)
    elif op == "keyswitch":
        if not args.ksk:
            raise CliError("keyswitch needs --ksk")
        res = ckks.key_switch(ct, load(args.ksk, KIND_KSK))
    else:  # argparse restricts choices
        raise CliError(f"unknown op {op}")
    save(args.out, res)
    _emit({"op": op, "out": args.out, "level": res.level, "components": len(res),
           "scale": res.scale})
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

BENCH_OPS = ("ntt", "intt", "dyadic", "keyswitch", "mul_relin")


def _time(fn, iterations: int) -> float:
    fn()  # warmup
    t0 = time.perf_counter()
    for _ in range(iterations):
        fn()
    return iterations / (time.perf_counter() - t0)


def run_bench(set_name: str, iterations: int, ops=BENCH_OPS, device: str = "stratix10",
              seed: int = 0) -> list[dict]:
    if iterations < 1:
        raise CliError("iterations must be >= 1")
    params = ckks.named_params(set_name)
    cfg = model.reference_config(device, set_name)
    rng = np.random.default_rng(seed)
    sk = ckks.keygen(params, rng)
    m0 = params.basis.moduli[0]
    tab = params.basis.table(m0)
    row = rng.integers(0, m0.p, params.n, dtype=np.uint64)
    other = rng.integers(0, m0.p, params.n, dtype=np.uint64)
    rows = []
    if "keyswitch" in ops or "mul_relin" in ops:
        rlk = ckks.relin_keygen(sk, params, rng)
        ct = ckks.sym_enc([0] * params.n, sk, params, rng)
    bodies = {
        "ntt": lambda: ntt_forward(row, tab),
        "intt": lambda: ntt_inverse(row, tab),
        "dyadic": lambda: mul_red_vec(row, other, shoup_vec(other, m0), m0),
        "keyswitch": lambda: ckks.key_switch(ct, rlk),
        "mul_relin": lambda: ckks.relinearize(ckks.hom_mul(ct, ct), rlk),
    }
    predict = {
        "ntt": lambda: model.lowlevel_throughput(cfg, "ntt"),
        "intt": lambda: model.lowlevel_throughput(cfg, "intt"),
        "dyadic": lambda: model.lowlevel_throughput(cfg, "dyadic"),
        "keyswitch": lambda: model.keyswitch_throughput(cfg),
        "mul_relin": lambda: model.mul_relin_throughput(cfg),
    }
    for op in ops:
        rows.append({"op": op, "host_ops_per_s": round(_time(bodies[op], iterations), 2),
                     "heax_ops_per_s": predict[op]()})
    return rows


def cmd_bench(args) -> int:
    ops = BENCH_OPS if args.op == "all" else (args.op,)
    rows = run_bench(args.set, args.iterations, ops, args.device, args.seed)
    if args.format == "json":
        _emit({"set": args.set, "device": args.device, "iterations": args.iterations,
               "results": rows}, "json")
    else:
        out = {"set": args.set, "device": args.device, "iterations": args.iterations}
        for r in rows:
            out[f"host.{r['op']}"] = r["host_ops_per_s"]
            out[f"heax.{r['op']}"] = r["heax_ops_per_s"]
        _emit(out)
    if args.plot_dir:
        from .plotting import plot_bench
        for p in plot_bench(rows, args.plot_dir, f"bench_{args.set}"):
            sys.stderr.write(f"figure: {p}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulator
# ---------------------------------------------------------------------------

def _pow2(text: str) -> int:
    v = int(text)
    if v < 1 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"{text} is not a power of two")
    return v


def cmd_sim_estimate(args) -> int:
    if args.set:
        device = args.device or "stratix10"
        cfg = model.reference_config(device, args.set)
    else:
        if args.n is None or args.k is None or args.intt0_cores is None or args.m0 is None:
            raise CliError("estimate needs --set or all of --n --k --intt0-cores --m0")
        device = args.device or "stratix10"
        freq = args.freq if args.freq else model.DEVICES[device].freq_hz
        cfg = model.derive_config(args.n, args.k, args.intt0_cores, args.m0, freq,
                                  device=device)
    rep = estimate(cfg, device)
    sys.stdout.write(to_json(rep) + "\n" if args.format == "json" else to_text(rep))
    if args.plot_dir:
        from .plotting import plot_estimate
        stem = f"estimate_{device}_n{cfg.n}_k{cfg.k}"
        for p in plot_estimate(rep, args.plot_dir, stem):
            sys.stderr.write(f"figure: {p}\n")
    return EXIT_OK


def cmd_sim_verify(args) -> int:
    from .modarith import gen_ntt_primes
    from .ntt import ntt_table

    rng = np.random.default_rng(args.seed)
    failed = False
    for n in args.n:
        m = gen_ntt_primes(n)[0]
        tab = ntt_table(m, n)
        for nc in args.nc:
            if 2 * nc > n:
                sys.stdout.write(f"n={n} nc={nc} skip\n")
                continue
            ok, cycles = True, 0
            try:
                for _ in range(args.trials):
                    a = rng.integers(0, m.p, n, dtype=np.uint64)
                    res = simulate_banked_ntt(a, tab, nc)
                    cycles = res.cycles
                    ok &= bool(np.array_equal(res.output, ntt_forward(a, tab)))
            except BankConflictError as exc:
                ok = False
                sys.stderr.write(f"error: {exc}\n")
            failed |= not ok
            sys.stdout.write(f"n={n} nc={nc} trials={args.trials} cycles={cycles} "
                             f"{'ok' if ok else 'MISMATCH'}\n")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heax", description="RNS-CKKS kernels and accelerator model")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate parameters and keys")
    p.add_argument("--set", default="A", help="A, B, C or custom")
    p.add_argument("--n", type=_pow2)
    p.add_argument("--k", type=int)
    p.add_argument("--log-qp", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rotations", help="comma separated rotation steps")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a text vector or serialized plaintext")
    p.add_argument("--params", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=float,
                   help="encoding scale (default: 2^(bits of the top prime - 6))")
    p.add_argument("--level", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt to text")
    p.add_argument("--sk", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--raw", action="store_true", help="print integer coefficients")
    p.add_argument("--count", type=int, help="only the first COUNT coefficients")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("eval", help="homomorphic evaluation")
    p.add_argument("op", choices=["add", "mul", "relin", "rescale", "rotate", "keyswitch"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--in2", dest="input2")
    p.add_argument("--rlk")
    p.add_argument("--gk")
    p.add_argument("--ksk")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="host throughput next to the accelerator model")
    p.add_argument("--op", default="all", choices=("all",) + BENCH_OPS)
    p.add_argument("--set", default="A", choices=["A", "B", "C"])
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--device", default="stratix10", choices=sorted(model.DEVICES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.add_argument("--plot-dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sim", help="accelerator model")
    ssub = p.add_subparsers(dest="sim_command", required=True)
    e = ssub.add_parser("estimate", help="configuration, cycles, throughput, resources")
    e.add_argument("--set", choices=["A", "B", "C"])
    e.add_argument("--n", type=_pow2)
    e.add_argument("--k", type=int)
    e.add_argument("--intt0-cores", type=_pow2)
    e.add_argument("--m0", type=int)
    e.add_argument("--freq", type=float, help="clock in Hz (default: device clock)")
    e.add_argument("--device", choices=sorted(model.DEVICES))
    e.add_argument("--format", default="text", choices=["text", "json"])
    e.add_argument("--plot-dir")
    e.set_defaults(func=cmd_sim_estimate)
    v = ssub.add_parser("verify-ntt", help="banked dataflow against the reference NTT")
    v.add_argument("--n", type=_pow2, nargs="+", default=[1 << 12])
    v.add_argument("--nc", type=_pow2, nargs="+", default=[8])
    v.add_argument("--trials", type=int, default=1)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_sim_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CkksError, RnsError, SerializationError, CliError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        sys.stderr.write(f"error: {msg}\n")
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Measure CKKS noise over many trials and freeze test bounds.

For every parameter set this records, per trial, the largest coefficient of
  * fresh encryption noise,
  * key-switching noise (relinearized minus 3-component decryption),
  * end-to-end error of mul -> relin -> rescale against the exact product.
Bounds written to tests/noise_bounds.json are twice the observed maxima.

    python scripts/calibrate_noise.py --trials 1000 --sets A B C
"""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np

from heax import ckks
from heax.rns import centered, crt_reconstruct, rns_sub

ROOT = Path(__file__).resolve().parents[1]
DELTA = 1 << 20
MSG_RANGE = 4          # integer message coefficients in [-4, 4]
KEY_REFRESH = 50       # fresh keys every this many trials
SLACK = 2


def exact_rescaled_product(m0, m1, delta: int, p_last: int) -> np.ndarray:
    n = len(m0)
    full = np.convolve(m0.astype(np.int64), m1.astype(np.int64))
    neg = full[:n].copy()
    neg[:n - 1] -= full[n:]
    # round(v * delta^2 / p) in exact integer arithmetic
    num = np.array([int(v) * delta * delta for v in neg], dtype=object)
    return np.array([(2 * x + p_last) // (2 * p_last) for x in num], dtype=object)


def centered_diff(a, b, q: int) -> int:
    return max(abs(v) for v in centered([x - y for x, y in zip(a, b)], q))


def run_set(name: str, trials: int, seed: int) -> dict:
    params = ckks.named_params(name)
    rng = np.random.default_rng(seed)
    n = params.n
    p_last = params.basis.moduli[params.max_level].p
    q_top, _, _ = params.basis.crt_constants(params.max_level)
    fresh, ks, e2e = [], [], []
    t0 = time.time()
    for t in range(trials):
        if t % KEY_REFRESH == 0:
            sk = ckks.keygen(params, rng)
            rlk = ckks.relin_keygen(sk, params, rng)
        m0 = rng.integers(-MSG_RANGE, MSG_RANGE + 1, n)
        m1 = rng.integers(-MSG_RANGE, MSG_RANGE + 1, n)
        c0 = ckks.sym_enc([int(v) * DELTA for v in m0], sk, params, rng, scale=DELTA)
        c1 = ckks.sym_enc([int(v) * DELTA for v in m1], sk, params, rng, scale=DELTA)
        d0 = ckks.decrypt(c0, sk)
        fresh.append(max(abs(x - int(v) * DELTA) for x, v in zip(d0, m0)))
        c2 = ckks.hom_mul(c0, c1)
        c3 = ckks.relinearize(c2, rlk)
        diff = rns_sub(ckks.decrypt_poly(c3, sk).to_ntt(), ckks.decrypt_poly(c2, sk).to_ntt())
        ks.append(max(abs(v) for v in centered(crt_reconstruct(diff.to_coeff()), q_top)))
        out = ckks.decrypt(ckks.rescale(c3), sk)
        want = exact_rescaled_product(m0, m1, DELTA, p_last)
        e2e.append(max(abs(int(x) - int(y)) for x, y in zip(out, want)))
        if (t + 1) % 50 == 0:
            print(f"{name}: {t + 1}/{trials} fresh={max(fresh)} ks={max(ks)} "
                  f"e2e={max(e2e)} {time.time() - t0:.0f}s", flush=True)
    return {"trials": trials, "delta": DELTA, "msg_range": MSG_RANGE, "seed": seed,
            "max_fresh": max(fresh), "max_keyswitch": max(ks), "max_e2e": max(e2e),
            "mean_e2e": float(np.mean(e2e)),
            "bound_fresh": SLACK * max(fresh), "bound_keyswitch": SLACK * max(ks),
            "bound_e2e": SLACK * max(e2e), "_e2e": e2e}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--sets", nargs="+", default=["A", "B", "C"])
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default=str(ROOT / "tests" / "noise_bounds.json"))
    ap.add_argument("--plot-dir", default=str(ROOT / "calibration"))
    args = ap.parse_args()
    out = Path(args.out)
    table = json.loads(out.read_text()) if out.exists() else {}
    for name in args.sets:
        res = run_set(name, args.trials, args.seed)
        samples = res.pop("_e2e")
        table[name] = res
        out.write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
        if args.plot_dir:
            from heax.plotting import plot_error_hist
            plot_error_hist(samples, res["bound_e2e"], Path(args.plot_dir) / f"e2e_{name}.png",
                            f"Set-{name}: mul, relin, rescale error over {args.trials} trials")
        print(json.dumps({name: res}), flush=True)


if __name__ == "__main__":
    main()

"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--trials N]

Runs the Monte Carlo block (pipeline + reference per angle) through each
available backend on identical inputs, reports throughput, and verifies the
outputs are bit-identical.
"""

import argparse
import time

import numpy as np

from qcordic import PROFILES, atan_table, gain, to_real
from qcordic import _kernels_py
from qcordic.backend import HAVE_COMPILED
from qcordic.harness import _quantize_angles
from qcordic.pipeline import kernel_config, build_rom, rotation_init
from qcordic.reference import convergence_range


def run(kern, raws, params, rom):
    cfg = kernel_config(params, rom)
    x0, y0 = rotation_init(params)
    tbl = np.asarray(atan_table(params), dtype=np.float64)
    sq = np.empty(len(raws))
    res = np.empty(len(raws))
    t0 = time.perf_counter()
    kern.mc_block(raws, x0.raw, y0.raw, to_real(x0), to_real(y0), **cfg,
                  atan_tbl=tbl, k_inv=gain(params).k_inv,
                  sq_err=sq, residual=res)
    dt = time.perf_counter() - t0
    return dt, sq, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=200000)
    args = ap.parse_args()

    params = PROFILES["paper"]
    rom = build_rom(params)
    bound = convergence_range(params)
    rng = np.random.default_rng(1234)
    raws = _quantize_angles(rng.uniform(-bound, bound, args.trials), params)

    backends = [("pure", _kernels_py)]
    if HAVE_COMPILED:
        from qcordic import _kernels
        backends.append(("compiled", _kernels))
    else:
        print("compiled extension not built; benchmarking pure only")

    results = {}
    for name, kern in backends:
        n = args.trials if name == "compiled" else max(args.trials // 20, 1)
        dt, sq, res = run(kern, raws[:n], params, rom)
        results[name] = (n / dt, sq, res)
        print(f"{name:>8}: {n:>8} trials in {dt:7.3f} s "
              f"-> {n / dt:12.0f} trials/s")

    if len(results) == 2:
        pure_rate, psq, pres = results["pure"]
        comp_rate, csq, cres = results["compiled"]
        k = len(psq)
        match = np.array_equal(psq, csq[:k]) and np.array_equal(pres, cres[:k])
        print(f"speedup: {comp_rate / pure_rate:.1f}x | "
              f"outputs bit-identical on shared prefix: {match}")


if __name__ == "__main__":
    main()

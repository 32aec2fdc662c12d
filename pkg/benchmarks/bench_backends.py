#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-Python entropy kernels.

Run after installing the package:

    python benchmarks/bench_backends.py [--symbols N] [--scale S]
"""

import argparse
import time

import numpy as np

import featcodec as fc
from featcodec.codec import _purepy
from featcodec.codec import transform

try:
    from featcodec.codec import _speedups
except ImportError:
    _speedups = None


def timeit(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def bench_symbols(n):
    rng = np.random.default_rng(0)
    syms = rng.integers(0, 256, size=n).astype(np.int64)
    rows = []
    for name, mod in backends():
        data, t_enc = timeit(mod.encode_symbols, syms, 256)
        back, t_dec = timeit(mod.decode_symbols, data, n, 256)
        assert np.array_equal(back, syms)
        rows.append((name, n / t_enc, n / t_dec))
    report(f"order-0 symbols ({n:,} x alphabet 256)", rows)


def bench_coeffs(scale):
    tab = fc.default_truncation_table()
    t = fc.synth_feature(fc.TaskKind.Seg, model="smooth", seed=0, scale=scale)
    q = fc.quantize_uniform(fc.truncate(t, tab), tab)
    plane = fc.pack(q)
    cfg = fc.CodecConfig(qp=27)
    padded = np.pad(
        plane.samples.astype(np.float64),
        ((0, (-plane.height) % cfg.block), (0, (-plane.width) % cfg.block)),
        mode="edge",
    )
    h, w = padded.shape
    blocks = (
        padded.reshape(h // cfg.block, cfg.block, w // cfg.block, cfg.block)
        .transpose(0, 2, 1, 3)
        .reshape(-1, cfg.block, cfg.block)
    )
    scaled = transform.dct2(blocks) / cfg.step
    levels = np.floor(np.abs(scaled) + 0.5) * np.sign(scaled)
    zz = levels.astype(np.int32).reshape(len(levels), -1)[
        :, transform.zigzag_order(cfg.block)
    ]
    nsamples = plane.samples.size
    rows = []
    for name, mod in backends():
        data, t_enc = timeit(mod.encode_coeff_blocks, zz)
        back, t_dec = timeit(mod.decode_coeff_blocks, data, zz.shape[0], zz.shape[1])
        assert np.array_equal(back, zz)
        rows.append((name, nsamples / t_enc, nsamples / t_dec))
    report(
        f"coefficient blocks (Seg plane {plane.height}x{plane.width}, qp 27)", rows
    )


def backends():
    pairs = [("python", _purepy)]
    if _speedups is not None:
        pairs.insert(0, ("compiled", _speedups))
    return pairs


def report(title, rows):
    print(f"\n{title}")
    print(f"  {'backend':<10} {'encode':>14} {'decode':>14}")
    for name, enc, dec in rows:
        print(f"  {name:<10} {enc / 1e6:>11.2f} M/s {dec / 1e6:>11.2f} M/s")
    if len(rows) == 2:
        print(
            f"  speedup    {rows[0][1] / rows[1][1]:>11.1f} x "
            f"{rows[0][2] / rows[1][2]:>13.1f} x"
        )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--symbols", type=int, default=200_000)
    ap.add_argument("--scale", type=int, default=8, help="synth scale divisor")
    args = ap.parse_args()
    print(f"active backend: {fc.BACKEND}")
    if _speedups is None:
        print("compiled extension not built; benchmarking the fallback only")
    bench_symbols(args.symbols)
    bench_coeffs(args.scale)


if __name__ == "__main__":
    main()

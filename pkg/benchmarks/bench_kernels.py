"""Time the numba and numpy kernel backends on the same trial blocks.

    python benchmarks/bench_kernels.py --trials 2000 --ml-trials 100
"""

import argparse
import time

import numpy as np

from rqsm import kernels
from rqsm.channel import sample_channel, RngStream
from rqsm.constellation import conventional, split_words
from rqsm.config import SystemConfig


def _best(fn, repeat):
    fn()  # warm-up (numba compiles here)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(trials, ml_trials, N, Nr, M, repeat):
    sysc = SystemConfig.from_snr_db(N, Nr, M, -25.0)
    c = conventional(M)
    rng = np.random.default_rng(0)
    H = np.stack([sample_channel(RngStream(0, t, "channel"), Nr, N) for t in range(trials)])
    words = rng.integers(0, 2 ** sysc.rate, trials)
    m, n, ir, ii = split_words(words, M, Nr)
    xr, xi = c.real_dim.levels[ir], c.imag_dim.levels[ii]
    noise = np.sqrt(sysc.n0 / 2) * (rng.standard_normal((trials, Nr)) + 1j * rng.standard_normal((trials, Nr)))
    pos = c.real_dim.levels[c.real_dim.levels > 0]
    cid, cdelta = kernels.delta_classes(pos)
    rows = []
    for name in ("numba", "numpy"):
        k = kernels.load(name)
        y = k.transmit_block(H, m, n, xr, xi, sysc.beta)[0] + noise
        t_tx = _best(lambda: k.transmit_block(H, m, n, xr, xi, sysc.beta), repeat)
        t_gd = _best(lambda: k.gd_block(y, sysc.beta, c.real_dim.levels, c.imag_dim.levels), repeat)
        t_ml = _best(lambda: k.ml_block(y[:ml_trials], H[:ml_trials], sysc.beta, pos, cid, cdelta), repeat)
        rows.append((name, t_tx / trials, t_gd / trials, t_ml / ml_trials))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--ml-trials", type=int, default=100)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--nr", type=int, default=4)
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    rows = bench(a.trials, a.ml_trials, a.n, a.nr, a.m, a.repeat)
    print(f"N={a.n} Nr={a.nr} M={a.m}; microseconds per trial (best of {a.repeat})")
    print(f"{'backend':8s} {'transmit':>10s} {'gd':>10s} {'ml':>10s}")
    for name, tx, gd, ml in rows:
        print(f"{name:8s} {tx * 1e6:10.1f} {gd * 1e6:10.2f} {ml * 1e6:10.1f}")
    nb, npy = rows
    print(f"numba speedup: transmit {npy[1] / nb[1]:.1f}x, gd {npy[2] / nb[2]:.1f}x, ml {npy[3] / nb[3]:.1f}x")


if __name__ == "__main__":
    main()

"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from atrp import QidGroup, bounds_from_delta, kernels
from atrp.oracle import GridSpec, _axes, _flatten


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile for numba)
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def cases(rng):
    m = 1_000_000
    p = rng.random(m) + 0.01
    p /= p.sum()
    d = rng.random(m)
    lo, hi = np.clip(d - 0.1, 0, 1), np.clip(d + 0.1, 0, 1)
    pi, mass1 = kernels.numpy_backend.anchor(p, lo)

    g = QidGroup.from_arrays([0.4, 0.3, 0.2, 0.1], [0.1, 0.5, 0.7, 1.0])
    flat, lens = _flatten(_axes(g, bounds_from_delta(g.d, 0.8), GridSpec(step=0.01)))

    n = 2000
    codes = rng.integers(0, 4, (n, 3))
    dn = rng.random(n)
    return {
        "anchor (m=1e6)": lambda k: k.anchor(p, lo),
        "capped_sum (m=1e6)": lambda k: k.capped_sum(p, hi, mass1, pi),
        "greedy_fill (m=1e6)": lambda k: k.greedy_fill(p * lo, p * hi, 0.5),
        "max_confidence (m=1e6)": lambda k: k.max_confidence(p, d),
        f"grid_search ({int(np.prod(lens))} pts)": lambda k: k.grid_search(flat, lens, g.p),
        f"pairwise_violation (n={n})": lambda k: k.pairwise_violation(dn, codes, 0.0, 0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.numba_backend is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, call in cases(rng).items():
        t_np = best_of(lambda: call(kernels.numpy_backend), args.repeat)
        t_nb = best_of(lambda: call(kernels.numba_backend), args.repeat)
        print(f"{name:32s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()

"""Time the batch classifier with the numba and pure-numpy backends.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 3]

The numpy path alone is what runs when THERMOCONE_NO_NUMBA=1 is set.
"""

import argparse
import time

import numpy as np

from thermocone import _kernels
from thermocone.simplex_core import GibbsContext, classify_many
from thermocone.volumes import sample_simplex

CASES = [
    ("d=3 beta=0 (uniform path)", (0, 1, 2), 0.0),
    ("d=3 beta=0.5", (0, 1, 2), 0.5),
    ("d=5 beta=1", (0, 1, 2, 3, 4), 1.0),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    print(f"{'case':28s}" + "".join(f"{b:>12s}" for b in backends) + "   agree")
    for name, energies, beta in CASES:
        ctx = GibbsContext(energies, beta)
        d = len(energies)
        p = np.random.default_rng(0).dirichlet(np.ones(d))
        qs = sample_simplex(d, args.n, seed=0)
        codes, cells = {}, []
        for b in backends:
            codes[b] = classify_many(qs[:1000], p, ctx, backend=b)  # warm-up / JIT
            cells.append(best_of(lambda: classify_many(qs, p, ctx, backend=b), args.repeat))
            codes[b] = classify_many(qs, p, ctx, backend=b)
        agree = all(np.array_equal(codes[backends[0]], c) for c in codes.values())
        print(f"{name:28s}" + "".join(f"{t:11.3f}s" for t in cells) + f"   {agree}")
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; numpy only")


if __name__ == "__main__":
    main()

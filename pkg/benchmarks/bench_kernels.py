"""Time the numba and numpy backends of the index kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case checks that both backends return identical arrays before timing.
The first numba call (compilation or cache load) is excluded.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from mmd import _kernels
from mmd.groups import make_group
from mmd.kt import kt_w


def cases():
    for orders in ([4], [2, 2, 2], [16]):
        G = make_group(orders)
        n = G.order
        perm = kt_w(G).perm
        yield (f"embed_perm W13 |G|={n}",
               lambda b, perm=perm, n=n: _kernels.embed_perm(perm, [n, n, n], [0, 2], backend=b))
    rng = np.random.default_rng(0)
    for orders, N in (([2], 12), ([4], 6), ([8], 4)):
        G = make_group(orders)
        n = G.order
        psi = rng.normal(size=2 * n ** N) + 1j * rng.normal(size=2 * n ** N)
        yield (f"pair_shift |G|={n} N={N} dim={psi.size}",
               lambda b, psi=psi, G=G, n=n, N=N: _kernels.pair_shift(psi, G.add_table, 2, n,
                                                                      n ** (N - 2), backend=b))
        yield (f"pair_shift last legs |G|={n} N={N}",
               lambda b, psi=psi, G=G, n=n, N=N: _kernels.pair_shift(psi, G.add_table, 2 * n ** (N - 2), n,
                                                                      1, backend=b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    print(f"{'case':44s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for name, fn in cases():
        ref = fn("numpy")
        times = {}
        for b in backends:
            assert np.array_equal(fn(b), ref), f"{name}: {b} disagrees with numpy"
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        speed = f"{times['numpy'] / times['numba']:8.1f}x" if "numba" in times else "      -"
        print(f"{name:44s} " + " ".join(f"{times[b] * 1e3:10.3f}ms" for b in backends) + f"  {speed}")


if __name__ == "__main__":
    main()

"""Time the hot kernels under the numba and pure-numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run once per backend to warm up (numba compiles on first
use), then timed as the best of ``--repeat`` runs.  Outputs of the two
backends are compared so a speed-up never hides a divergence.
"""

import argparse
import time

import numpy as np

from airyedge import _tridiag_kernels as TK
from airyedge import riccati, tridiag
from airyedge._accel import HAVE_NUMBA, use_backend


def _cases():
    diag, off = tridiag.sample_gbeta_batch(512, 2.0, 0, 0, 64)
    off2 = off ** 2
    shifts = np.linspace(40.0, 46.0, 32)[None, :].repeat(64, axis=0)
    lam = tridiag.top_k_batch(diag, off, 1, 1e-12)[:, 0]
    return {
        "sturm counts 64x512, 32 shifts": lambda: TK.sturm_counts(diag, off2, shifts),
        "top-3 bisection 64x512": lambda: tridiag.top_k_batch(diag, off, 3, 1e-10),
        "log eigenvector 64x512": lambda: TK.eigvec_log(diag, off, lam),
        "diffusion counts 256 paths, lam=3": lambda: riccati.count_batch(3.0, 2.0, 0, 0, 256),
    }


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    print(f"{'kernel':38s}" + "".join(f"{b:>12s}" for b in backends) + ("     speed-up" if len(backends) == 2 else ""))
    for name, fn in _cases().items():
        times, outs = [], []
        for b in backends:
            with use_backend(b):
                outs.append(fn())
                times.append(_best(fn, args.repeat))
        line = f"{name:38s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            a, b = (outs[0], outs[1]) if isinstance(outs[0], tuple) else ((outs[0],), (outs[1],))
            same = all(np.allclose(x, y, rtol=1e-12, atol=1e-12) for x, y in zip(a, b))
            line += f"{times[1] / times[0]:12.1f}x" + ("" if same else "  (outputs differ)")
        print(line)


if __name__ == "__main__":
    main()

"""Compare the compiled and pure-Python spectrum walkers.

    python3 benchmarks/bench_walker.py [--count 100000] [--repeat 3]

Both backends must produce bitwise identical values and tails; the script
checks this before reporting timings.
"""
import argparse
import time

import numpy as np

from tractlab import KernelModel
from tractlab._backend import BACKEND
from tractlab.spectrum import Spectrum

MODELS = {
    "ek d=3": KernelModel.exp_korobov(3, 1.0, 1.0, 0.5),
    "wk d=4 r=2 g=j^-3": KernelModel.weighted_korobov(4, 2.0, "power:beta=3"),
    "wk d=8 r=1 g=j^-2": KernelModel.weighted_korobov(8, 1.0, "power:beta=2"),
}


def run(model, count, backend):
    t0 = time.perf_counter()
    s = Spectrum(model, keep_indices=True, backend=backend)
    s.extend(count)
    dt = time.perf_counter() - t0
    return dt, s.values(count), s.tails(count)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if BACKEND != "cython":
        print("compiled walker not available; only the pure-Python timings are shown")
    print(f"{'model':22s} {'count':>8s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, model in MODELS.items():
        tp = min(run(model, args.count, "python")[0] for _ in range(args.repeat))
        _, vp, tlp = run(model, args.count, "python")
        if BACKEND == "cython":
            tc = min(run(model, args.count, "cython")[0] for _ in range(args.repeat))
            _, vc, tlc = run(model, args.count, "cython")
            assert np.array_equal(vp, vc) and np.array_equal(tlp, tlc), f"backends disagree on {name}"
            print(f"{name:22s} {args.count:8d} {tp:11.3f} {tc:11.3f} {tp / tc:7.1f}x")
        else:
            print(f"{name:22s} {args.count:8d} {tp:11.3f} {'-':>11s} {'-':>8s}")


if __name__ == "__main__":
    main()

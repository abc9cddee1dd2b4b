"""Compare the compiled and pure-Python sweep kernels.

    python3 benchmarks/bench_kernels.py [--sizes 10000 100000] [--repeat 5]

Prints one row per kernel and size with the best-of-N time of each backend and
the speed-up of the compiled one.
"""

import argparse
import gc
import random
import sys
import time

from tphen.temporal import _pykernels

try:
    from tphen.temporal import _ckernels
except ImportError:
    _ckernels = None


def disjoint(rng, n):
    out, t = [], 0
    for _ in range(n):
        t += rng.randint(1, 4)
        e = t + rng.randint(1, 4)
        out.append((t, e))
        t = e
    return out


def overlapping(rng, n):
    out = []
    for _ in range(n):
        s = rng.randint(0, 4 * n)
        out.append((s, s + rng.randint(1, 40)))
    return sorted(out)


def triples(rng, n):
    ts = sorted(rng.sample(range(4 * n), n))
    return [(t, *rng.choice([(True, False), (False, True), (True, True)])) for t in ts]


CASES = {
    "before_disjoint": lambda rng, n: (disjoint(rng, n), disjoint(rng, n)),
    "intersection": lambda rng, n: (disjoint(rng, n), disjoint(rng, n)),
    "complement": lambda rng, n: (disjoint(rng, n), disjoint(rng, n)),
    "coalesce": lambda rng, n: (overlapping(rng, n),),
    "maximal_range": lambda rng, n: (triples(rng, n),),
}


def best(fn, args, repeat):
    times = []
    gc.disable()
    try:
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn(*args)
            times.append(time.perf_counter() - t0)
    finally:
        gc.enable()
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10_000, 50_000, 100_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    opts = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the Python backend is timed", file=sys.stderr)

    print(f"{'kernel':<16}{'n':>9}{'python ms':>12}{'cython ms':>12}{'speed-up':>10}")
    for name, make in CASES.items():
        for n in opts.sizes:
            args = make(random.Random(opts.seed), n)
            py = best(getattr(_pykernels, name), args, opts.repeat)
            if _ckernels is None:
                print(f"{name:<16}{n:>9}{py * 1e3:>12.2f}{'-':>12}{'-':>10}")
                continue
            cy_fn = getattr(_ckernels, name)
            assert cy_fn(*args) == getattr(_pykernels, name)(*args), name
            cy = best(cy_fn, args, opts.repeat)
            print(f"{name:<16}{n:>9}{py * 1e3:>12.2f}{cy * 1e3:>12.2f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()

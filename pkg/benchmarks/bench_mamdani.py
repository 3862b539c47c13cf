"""Benchmark the batch fuzzy-inference kernel across backends.

Runs every importable backend on identical random batches, checks that
the scores agree bit for bit, and reports per-call wall time plus
throughput. Invoke from the repository root:

    python3 benchmarks/bench_mamdani.py --sizes 1000 10000 100000
"""

import argparse
import statistics
import time

import numpy as np

from generank.kernels import BACKEND, available_backends


def _random_batch(rng, size):
    fc = rng.random(size)
    var = rng.random(size)
    rs = rng.random(size)
    params = np.array([0.2, 0.8, 0.25, 0.75, 0.15, 0.85])
    return fc, var, rs, params


def _time_call(impl, batch, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        impl(*batch)
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes",
        type=int,
        nargs="+",
        default=[1000, 10000, 100000],
        help="batch sizes (genes per call) to benchmark",
    )
    parser.add_argument(
        "--repeats", type=int, default=7, help="timed repetitions per size"
    )
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)

    impls = available_backends()
    rng = np.random.default_rng(args.seed)
    print(f"active backend: {BACKEND}; available: {', '.join(impls)}")
    header = f"{'size':>8}  " + "".join(f"{name + ' (ms)':>16}" for name in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)

    for size in args.sizes:
        batch = _random_batch(rng, size)
        reference = None
        best = {}
        for name, impl in impls.items():
            scores, _ = impl(*batch)
            if reference is None:
                reference = scores
            elif not np.array_equal(scores, reference):
                raise SystemExit(f"backend {name} disagrees with reference scores")
            best[name], _ = _time_call(impl, batch, args.repeats)
        row = f"{size:>8}  " + "".join(f"{best[n] * 1e3:>16.3f}" for n in impls)
        if len(best) == 2:
            numpy_t, cython_t = best["numpy"], best.get("cython")
            row += f"{numpy_t / cython_t:>9.1f}x"
        print(row)

    print("scores agree bit for bit across backends")


if __name__ == "__main__":
    main()

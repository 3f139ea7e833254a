#!/usr/bin/env python3
"""Benchmark the hot kernels: numba fast path vs the fallback.

Workloads mirror real use: batched GF(2) rank of sampled generator
matrices (the Monte Carlo oracle) and BP/GE decode loops on LT-like
streams at k=250 (the overhead experiment).  The fallback for rank_batch
is vectorized numpy; for the decode loops it is the same algorithm without
jitting.  Run after `pip install -e .`:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from fountainkit import _kernels
from fountainkit.distributions import lt_pds
from fountainkit.simulator import _sample_chunk


def timeit(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rank_batch(table):
    k, n, m = 6, 5, 200_000
    rng = np.random.default_rng(0)
    cols = rng.integers(0, 1 << k, size=(m, n)).astype(np.int64)
    rows = []
    for name, fn in table.items():
        if name == "loops" and "numba" in table:
            continue  # unjitted loops are not a useful fallback; skip
        fn(cols[:100], k)  # warmup / compile
        rows.append((name, timeit(fn, cols, k)))
    return f"rank_batch  ({m} samples, k={k}, n={n})", rows


def lt_streams(n_trials, k=250):
    pds = lt_pds(k, 0.03, 0.5)
    streams = []
    for i in range(n_trials):
        rng = np.random.default_rng([123, i])
        supports = _sample_chunk(pds, 1, 340, rng)
        indices = np.concatenate(supports).astype(np.int64)
        indptr = np.zeros(len(supports) + 1, np.int64)
        for j, s in enumerate(supports):
            indptr[j + 1] = indptr[j] + len(s)
        streams.append((supports, indices, indptr))
    return streams


def bench_bp(table, streams, k=250):
    def run(fn):
        for _, indices, indptr in streams:
            fn(indices, indptr, k)

    rows = []
    for name, fn in table.items():
        fn(streams[0][1], streams[0][2], k)  # warmup / compile
        rows.append((name, timeit(lambda: run(fn))))
    return f"bp_peel     ({len(streams)} LT streams, k={k})", rows


def bench_ge(table, streams, k=250):
    packed = [
        _kernels.pack_supports_to_words(supports, k) for supports, _, _ in streams
    ]

    def run(fn):
        for words in packed:
            fn(words, k)

    rows = []
    for name, fn in table.items():
        fn(packed[0], k)  # warmup / compile
        rows.append((name, timeit(lambda: run(fn))))
    return f"ge_eliminate({len(streams)} LT streams, k={k})", rows


def main():
    print(f"numba available and enabled: {_kernels.USING_NUMBA}")
    print("(set FOUNTAINKIT_NO_NUMBA=1 to force the fallback inside the package)\n")
    table = _kernels.variants()
    streams = lt_streams(400)
    sections = [
        bench_rank_batch(table["rank_batch"]),
        bench_bp(table["bp_peel_first_done"], streams),
        bench_ge(table["ge_first_done"], streams),
    ]
    for title, rows in sections:
        print(title)
        base = max(t for _, t in rows)
        for name, t in sorted(rows, key=lambda x: x[1]):
            print(f"    {name:8s} {t * 1000:10.1f} ms   x{base / t:6.1f}")
        print()


if __name__ == "__main__":
    main()

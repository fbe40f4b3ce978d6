#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Runs the two hot loops (pairwise cosine over a sparse corpus, one LDA
E-step sweep) on synthetic inputs of a few sizes and reports the best
wall time per backend plus the speedup.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np
import scipy.sparse as sp

from subcompose._kernels import _pure

try:
    from subcompose._kernels import _speedups
except ImportError:
    _speedups = None


def random_corpus(rng, n_docs, vocab, density):
    matrix = sp.random(
        n_docs, vocab, density=density, format="csr",
        random_state=np.random.RandomState(rng.integers(2**31)),
        data_rvs=lambda size: rng.random(size) + 0.1,
    )
    matrix.sort_indices()
    return (
        matrix.indptr.astype(np.int64),
        matrix.indices.astype(np.int64),
        matrix.data.astype(np.float64),
    )


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_pairwise(rng, repeats):
    rows = []
    for n_docs, vocab, density in ((200, 2000, 0.02), (800, 4000, 0.01)):
        indptr, indices, data = random_corpus(rng, n_docs, vocab, density)
        args = (indptr, indices, data, n_docs, vocab)
        timings = {}
        for label, impl in backends():
            timings[label] = best_time(lambda: impl.pairwise_cosine(*args), repeats)
        rows.append((f"pairwise_cosine n={n_docs} V={vocab}", timings))
    return rows


def bench_estep(rng, repeats):
    rows = []
    for n_docs, vocab, k in ((400, 1000, 50), (800, 2000, 100)):
        indptr, indices, data = random_corpus(rng, n_docs, vocab, 0.02)
        counts = np.ceil(data * 4).astype(np.float64)
        lam = rng.gamma(100.0, 0.01, (k, vocab))
        exp_elog_beta = lam / lam.sum(axis=1)[:, None]
        gamma = np.full((n_docs, k), 1.0 + counts.sum() / (n_docs * k))
        beta = np.ascontiguousarray(exp_elog_beta)
        timings = {}
        for label, impl in backends():
            # fresh gamma per call so no run warm-starts from the last one
            timings[label] = best_time(
                lambda: impl.lda_estep(
                    indptr, indices, counts, beta, 0.5, gamma.copy(), 1e-6, 100
                ),
                repeats,
            )
        rows.append((f"lda_estep n={n_docs} V={vocab} K={k}", timings))
    return rows


def backends():
    yield "pure", _pure
    if _speedups is not None:
        yield "compiled", _speedups


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    options = parser.parse_args()

    if _speedups is None:
        print("compiled extension not importable; timing the fallback only")

    rng = np.random.default_rng(0)
    rows = bench_pairwise(rng, options.repeats) + bench_estep(rng, options.repeats)

    width = max(len(name) for name, _ in rows)
    for name, timings in rows:
        parts = [f"{label}: {secs * 1e3:8.2f} ms" for label, secs in timings.items()]
        if "compiled" in timings:
            parts.append(f"speedup: {timings['pure'] / timings['compiled']:5.1f}x")
        print(f"{name:<{width}}  " + "  ".join(parts))


if __name__ == "__main__":
    main()

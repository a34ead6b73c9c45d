"""Benchmark the compiled scoring kernels against the numpy fallback.

Times the three hot kernels on serving-scale workloads: BM25 and TF-IDF
accumulation over a ~30k-passage inverted index, and MaxSim over packed
token matrices. Single-vector dot search is BLAS-backed numpy either way,
so it is reported once for context rather than compared.

Usage: python benchmarks/bench_kernels.py [--passages 30000] [--queries 50]
"""

import argparse
import random
import time

import numpy as np

from reportqa import kernels
from reportqa.dense import MODE_LATE, MODE_SINGLE, VectorIndex, dot_search, maxsim_search
from reportqa.ingest import Passage
from reportqa.kernels import _fallback
from reportqa.sparse import Bm25Params, bm25_search, build_sparse_index, tfidf_search

try:
    from reportqa.kernels import _kernels as _compiled
except ImportError:
    _compiled = None

VOCAB = [f"term{i:04d}" for i in range(4000)]
# Zipf-ish weights: a handful of very common terms with long posting lists,
# a long tail of rare ones, like real query traffic.
WEIGHTS = [1.0 / (rank + 5) for rank in range(len(VOCAB))]


class use_impl:
    """Temporarily rebind the kernel functions exported by reportqa.kernels."""

    NAMES = ("bm25_accumulate", "tfidf_accumulate", "maxsim_scores")

    def __init__(self, impl):
        self.impl = impl

    def __enter__(self):
        self.saved = {n: getattr(kernels, n) for n in self.NAMES}
        for n in self.NAMES:
            setattr(kernels, n, getattr(self.impl, n))

    def __exit__(self, *exc):
        for n, fn in self.saved.items():
            setattr(kernels, n, fn)
        return False


def build_corpus(n_passages, rng):
    passages = []
    for i in range(n_passages):
        words = rng.choices(VOCAB, weights=WEIGHTS, k=rng.randint(30, 60))
        passages.append(
            Passage(f"p{i:06d}", "doc", i, " ".join(words), 0, 1)
        )
    return passages


def build_late_index(n_passages, tokens_per_passage, dim, rng):
    ids = [f"p{i:06d}" for i in range(n_passages)]
    offsets = np.arange(0, (n_passages + 1) * tokens_per_passage, tokens_per_passage, dtype=np.int64)
    matrix = rng.normal(size=(n_passages * tokens_per_passage, dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    return VectorIndex(ids, MODE_LATE, dim, token_matrix=matrix, offsets=offsets)


def best_of(fn, repeats=3):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--passages", type=int, default=30_000)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--dim", type=int, default=64)
    args = parser.parse_args()

    if _compiled is None:
        print("compiled kernels not built; install with a C toolchain to compare")
        return

    rng = random.Random(0)
    nprng = np.random.default_rng(0)

    print(f"building sparse index over {args.passages} passages ...")
    index = build_sparse_index(build_corpus(args.passages, rng))
    queries = [
        " ".join(rng.choices(VOCAB, weights=WEIGHTS, k=6))
        for _ in range(args.queries)
    ]
    params = Bm25Params()

    print(f"building late-interaction index (2000 x 32 tokens, d={args.dim}) ...")
    late = build_late_index(2000, 32, args.dim, nprng)
    token_queries = [
        q / np.linalg.norm(q, axis=1, keepdims=True)
        for q in nprng.normal(size=(args.queries, 8, args.dim))
    ]

    single = VectorIndex(
        late.ids, MODE_SINGLE, args.dim,
        vectors=nprng.normal(size=(2000, args.dim)),
    )
    vec_queries = list(nprng.normal(size=(args.queries, args.dim)))

    workloads = {
        "bm25_search": lambda: [bm25_search(index, params, q, 10) for q in queries],
        "tfidf_search": lambda: [tfidf_search(index, q, 10) for q in queries],
        "maxsim_search": lambda: [maxsim_search(late, q, 10) for q in token_queries],
    }

    print()
    print(f"{'workload':<14} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, fn in workloads.items():
        with use_impl(_fallback):
            t_python = best_of(fn)
        with use_impl(_compiled):
            t_compiled = best_of(fn)
        print(
            f"{name:<14} {t_python:>9.3f}s {t_compiled:>9.3f}s "
            f"{t_python / t_compiled:>7.1f}x"
        )

    t_dot = best_of(lambda: [dot_search(single, q, 10) for q in vec_queries])
    print(f"{'dot_search':<14} {t_dot:>9.3f}s {'(BLAS either way)':>20}")


if __name__ == "__main__":
    main()

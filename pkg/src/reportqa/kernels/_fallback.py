"""Numpy implementations of the scoring kernels.

Same signatures as the compiled module; used when the extension is not
built or when REPORTQA_PURE_PYTHON is set.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def bm25_accumulate(scores, rows, tfs, idf, k1, b, len_norm):
    """scores[rows] += idf * tf*(k1+1) / (tf + k1*(1-b+b*len_norm[rows])).

    ``rows`` holds distinct passage rows for one term, so fancy-index +=
    is safe here.
    """
    denom = tfs + k1 * (1.0 - b + b * len_norm[rows])
    scores[rows] += idf * tfs * (k1 + 1.0) / denom


def tfidf_accumulate(scores, rows, tfs, weight):
    """scores[rows] += weight * (1 + ln(tf))."""
    scores[rows] += weight * (1.0 + np.log(tfs))


def maxsim_scores(query_vecs, token_matrix, offsets):
    """Late-interaction scores for every passage in a packed token matrix.

    query_vecs: (Tq, d); token_matrix: (Ttotal, d); offsets: (N+1,) row
    boundaries per passage. Returns (N,) float64 scores, where passage i
    scores sum_q max_t <query_q, token_t> over its rows; passages with no
    tokens (empty segment) score 0.
    """
    n = offsets.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    if query_vecs.shape[0] == 0 or token_matrix.shape[0] == 0:
        return out
    sims = query_vecs @ token_matrix.T  # (Tq, Ttotal)
    lengths = np.diff(offsets)
    nonempty = np.flatnonzero(lengths > 0)
    if nonempty.size:
        # Empty segments have zero width, so the starts of the non-empty
        # segments tile the packed matrix exactly; reduceat over them is
        # safe even with empty segments interleaved.
        maxima = np.maximum.reduceat(sims, offsets[nonempty], axis=1)
        out[nonempty] = maxima.sum(axis=0)
    return out

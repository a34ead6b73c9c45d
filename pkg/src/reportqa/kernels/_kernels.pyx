# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels: sparse score accumulation and MaxSim."""

from libc.math cimport log

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def bm25_accumulate(
    cnp.float64_t[::1] scores,
    cnp.int32_t[::1] rows,
    cnp.float64_t[::1] tfs,
    double idf,
    double k1,
    double b,
    cnp.float64_t[::1] len_norm,
):
    """scores[rows] += idf * tf*(k1+1) / (tf + k1*(1-b+b*len_norm[rows]))."""
    cdef Py_ssize_t i, r
    cdef double tf
    for i in range(rows.shape[0]):
        r = rows[i]
        tf = tfs[i]
        scores[r] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len_norm[r]))


def tfidf_accumulate(
    cnp.float64_t[::1] scores,
    cnp.int32_t[::1] rows,
    cnp.float64_t[::1] tfs,
    double weight,
):
    """scores[rows] += weight * (1 + ln(tf))."""
    cdef Py_ssize_t i
    for i in range(rows.shape[0]):
        scores[rows[i]] += weight * (1.0 + log(tfs[i]))


def maxsim_scores(
    cnp.float64_t[:, ::1] query_vecs,
    cnp.float64_t[:, ::1] token_matrix,
    cnp.int64_t[::1] offsets,
):
    """Sum-of-max dot products per packed passage segment; empty segments
    score 0. Returns a float64 array of one score per passage."""
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef Py_ssize_t tq = query_vecs.shape[0]
    cdef Py_ssize_t d = query_vecs.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef cnp.float64_t[::1] out_v = out
    cdef Py_ssize_t p, q, t, j, lo, hi
    cdef double best, dot, total
    for p in range(n):
        lo = offsets[p]
        hi = offsets[p + 1]
        if hi <= lo:
            continue
        total = 0.0
        for q in range(tq):
            best = -1e308
            for t in range(lo, hi):
                dot = 0.0
                for j in range(d):
                    dot += query_vecs[q, j] * token_matrix[t, j]
                if dot > best:
                    best = dot
            total += best
        out_v[p] = total
    return out

"""Scoring kernels with a compiled fast path.

Importing this package selects the Cython extension when it is built and
the environment does not force the fallback; otherwise the numpy
implementations in ``_fallback`` are used. Both expose the same three
functions with identical semantics (tests assert parity).
"""

from __future__ import annotations

import os

from . import _fallback


def _select():
    if os.environ.get("REPORTQA_PURE_PYTHON"):
        return _fallback
    try:
        from . import _kernels  # compiled extension

        return _kernels
    except ImportError:
        return _fallback


_impl = _select()

bm25_accumulate = _impl.bm25_accumulate
tfidf_accumulate = _impl.tfidf_accumulate
maxsim_scores = _impl.maxsim_scores


def active_backend() -> str:
    """Name of the kernel implementation in use: "compiled" or "python"."""
    return _impl.BACKEND_NAME

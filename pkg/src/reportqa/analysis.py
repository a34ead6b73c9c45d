"""Text analysis and ranking primitives shared by the retrievers.

The analyzer is deliberately minimal: lowercase and split on any
non-alphanumeric character. No stemming or stopword removal, so rare
domain identifiers survive intact and results stay deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

# \w minus underscore == Unicode alphanumerics
_TOKEN_RE = re.compile(r"[^\W_]+")


def analyze(text: str) -> list[str]:
    """Tokenize ``text`` into lowercase alphanumeric terms.

    Splits on every non-alphanumeric character and drops empty tokens.
    Deterministic; "" analyzes to [].
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RankedHit:
    """One retrieval result: the common currency between retrieval,
    evaluation, and serving."""

    passage_id: str
    score: float
    rank: int  # 1-based


def rank_hits(scored: list[tuple[str, float]], k: int) -> list[RankedHit]:
    """Order (passage_id, score) pairs into the top-k hit list.

    Scores sort descending; ties break by ascending passage_id so results
    are deterministic. Ranks are assigned 1..len without gaps.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))[:k]
    return [
        RankedHit(passage_id=pid, score=float(score), rank=i)
        for i, (pid, score) in enumerate(ordered, start=1)
    ]


def select_top_rows(scores: np.ndarray, rows: np.ndarray, k: int) -> np.ndarray:
    """Rows carrying the k highest scores, keeping boundary ties, unordered.

    Cheap preselection before the exact (score desc, id asc) sort: anything
    dropped scores strictly below the kth-largest value, so it cannot reach
    the top k under any tie-break.
    """
    if rows.size <= k:
        return rows
    values = scores[rows]
    kth = np.partition(values, rows.size - k)[rows.size - k]
    return rows[values >= kth]

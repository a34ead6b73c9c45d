"""Term-based passage retrieval: inverted index, BM25, and TF-IDF cosine.

Index statistics use the non-negative IDF variant ln(1 + (N-df+0.5)/(df+0.5))
for BM25 so common terms in a small corpus cannot push scores negative, and
ln(N/df) for TF-IDF passage weights. Only the passage vector is cosine
normalized: normalizing the query rescales every score identically and
never changes the ranking.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .analysis import RankedHit, analyze, rank_hits, select_top_rows
from .errors import IntegrityError, NotFoundError, ValidationError
from .ingest import Passage

SPARSE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValidationError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValidationError(f"b must be in [0, 1], got {self.b}")


class InvertedIndex:
    """Immutable inverted index over a passage collection.

    Postings per term are kept as parallel row/tf arrays sorted by
    passage_id; derived statistics (length normalization, TF-IDF passage
    norms) are precomputed once so searches only accumulate.
    """

    def __init__(self, ids: list[str], token_counts: list[Counter]):
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate passage_id in index input")
        self.ids = list(ids)
        self.n_passages = len(ids)
        self._row_of = {pid: r for r, pid in enumerate(ids)}

        lens = [sum(c.values()) for c in token_counts]
        self.passage_len = dict(zip(ids, lens))
        self.avg_len = float(sum(lens)) / self.n_passages if self.n_passages else 0.0

        by_term: dict[str, list[tuple[int, int]]] = {}
        for row, counts in enumerate(token_counts):
            for term, tf in counts.items():
                by_term.setdefault(term, []).append((row, tf))

        self._postings_rows: dict[str, np.ndarray] = {}
        self._postings_tfs: dict[str, np.ndarray] = {}
        self.doc_freq: dict[str, int] = {}
        for term, entries in by_term.items():
            entries.sort(key=lambda e: ids[e[0]])
            self._postings_rows[term] = np.array(
                [e[0] for e in entries], dtype=np.int32
            )
            self._postings_tfs[term] = np.array(
                [e[1] for e in entries], dtype=np.float64
            )
            self.doc_freq[term] = len(entries)

        len_arr = np.array(lens, dtype=np.float64)
        self._len_norm = len_arr / self.avg_len if self.avg_len > 0 else len_arr * 0.0

        # per-passage L2 norm of the (1+ln tf)*ln(N/df) weight vector;
        # sorted term order keeps the fp accumulation reproducible no
        # matter how the index was constructed
        norms = np.zeros(self.n_passages, dtype=np.float64)
        for term in sorted(self._postings_rows):
            idf = self.tfidf_idf(term)
            if idf <= 0.0:
                continue
            w = (1.0 + np.log(self._postings_tfs[term])) * idf
            norms[self._postings_rows[term]] += w * w
        self._tfidf_norm = np.sqrt(norms)

    def postings(self, term: str) -> list[tuple[str, int]]:
        """Posting list for a term as (passage_id, tf), sorted by id."""
        rows = self._postings_rows.get(term)
        if rows is None:
            return []
        tfs = self._postings_tfs[term]
        return [(self.ids[r], int(tf)) for r, tf in zip(rows, tfs)]

    def terms(self) -> list[str]:
        return sorted(self._postings_rows)

    def bm25_idf(self, term: str) -> float:
        df = self.doc_freq.get(term, 0)
        return math.log1p((self.n_passages - df + 0.5) / (df + 0.5))

    def tfidf_idf(self, term: str) -> float:
        df = self.doc_freq.get(term, 0)
        if df == 0:
            return 0.0
        return math.log(self.n_passages / df)

    def _allowed_mask(self, allowed_ids: Iterable[str] | None) -> np.ndarray | None:
        if allowed_ids is None:
            return None
        mask = np.zeros(self.n_passages, dtype=bool)
        for pid in allowed_ids:
            row = self._row_of.get(pid)
            if row is not None:
                mask[row] = True
        return mask


def build_sparse_index(passages: Iterable[Passage]) -> InvertedIndex:
    """Analyze and index a passage collection."""
    ids = []
    counts = []
    for p in passages:
        ids.append(p.passage_id)
        counts.append(Counter(analyze(p.text)))
    return InvertedIndex(ids, counts)


def bm25_score(
    index: InvertedIndex,
    params: Bm25Params,
    query_terms: list[str],
    passage_id: str,
) -> float:
    """BM25 score of one passage for a bag of query terms.

    Repeated query terms count once; terms absent from the passage
    contribute zero.
    """
    row = index._row_of.get(passage_id)
    if row is None:
        raise NotFoundError(f"unknown passage_id: {passage_id!r}")
    score = 0.0
    norm = index._len_norm[row]
    for term in set(query_terms):
        rows = index._postings_rows.get(term)
        if rows is None:
            continue
        hit = np.flatnonzero(rows == row)
        if hit.size == 0:
            continue
        tf = float(index._postings_tfs[term][hit[0]])
        denom = tf + params.k1 * (1.0 - params.b + params.b * norm)
        score += index.bm25_idf(term) * tf * (params.k1 + 1.0) / denom
    return score


def _collect_hits(
    index: InvertedIndex,
    scores: np.ndarray,
    k: int,
    allowed_mask: np.ndarray | None,
) -> list[RankedHit]:
    if allowed_mask is not None:
        scores = np.where(allowed_mask, scores, 0.0)
    candidates = select_top_rows(scores, np.flatnonzero(scores > 0.0), k)
    pairs = [(index.ids[r], float(scores[r])) for r in candidates]
    return rank_hits(pairs, k)


def bm25_search(
    index: InvertedIndex,
    params: Bm25Params,
    query: str,
    k: int,
    allowed_ids: Iterable[str] | None = None,
) -> list[RankedHit]:
    """Top-k passages under BM25. A query that analyzes to no terms
    returns an empty result. ``allowed_ids`` restricts the candidate set
    (same corpus statistics) for report-scoped search."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    terms = analyze(query)
    if not terms or index.n_passages == 0:
        return []
    scores = np.zeros(index.n_passages, dtype=np.float64)
    for term in sorted(set(terms)):
        rows = index._postings_rows.get(term)
        if rows is None:
            continue
        kernels.bm25_accumulate(
            scores,
            rows,
            index._postings_tfs[term],
            index.bm25_idf(term),
            params.k1,
            params.b,
            index._len_norm,
        )
    return _collect_hits(index, scores, k, index._allowed_mask(allowed_ids))


def tfidf_search(
    index: InvertedIndex,
    query: str,
    k: int,
    allowed_ids: Iterable[str] | None = None,
) -> list[RankedHit]:
    """Top-k passages by TF-IDF cosine.

    Passage weights are (1+ln tf)*ln(N/df), query weights raw term counts;
    the score divides by the passage vector norm only. Passages whose
    weight vector is all zero are unscorable and never returned.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    terms = analyze(query)
    if not terms or index.n_passages == 0:
        return []
    scores = np.zeros(index.n_passages, dtype=np.float64)
    for term, qtf in sorted(Counter(terms).items()):
        rows = index._postings_rows.get(term)
        if rows is None:
            continue
        idf = index.tfidf_idf(term)
        if idf <= 0.0:
            continue
        kernels.tfidf_accumulate(
            scores, rows, index._postings_tfs[term], float(qtf) * idf
        )
    norms = index._tfidf_norm
    scorable = norms > 0.0
    scores = np.where(scorable, scores / np.where(scorable, norms, 1.0), 0.0)
    return _collect_hits(index, scores, k, index._allowed_mask(allowed_ids))


def save_sparse_index(index: InvertedIndex, path: str | Path) -> None:
    """Persist as a single self-describing JSON file."""
    payload = {
        "format_version": SPARSE_FORMAT_VERSION,
        "kind": "sparse_index",
        "n_passages": index.n_passages,
        "avg_len": index.avg_len,
        "ids": index.ids,
        "passage_len": [index.passage_len[pid] for pid in index.ids],
        "postings": {t: index.postings(t) for t in index.terms()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_sparse_index(path: str | Path) -> InvertedIndex:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "sparse_index":
        raise IntegrityError(f"{path}: not a sparse index file")
    if payload.get("format_version") != SPARSE_FORMAT_VERSION:
        raise IntegrityError(
            f"{path}: unsupported format_version {payload.get('format_version')!r}"
        )
    ids = payload["ids"]
    counts = [Counter() for _ in ids]
    row_of = {pid: r for r, pid in enumerate(ids)}
    for term, entries in payload["postings"].items():
        for pid, tf in entries:
            counts[row_of[pid]][term] = tf
    index = InvertedIndex(ids, counts)
    return index

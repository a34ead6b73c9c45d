"""Evaluation harness: retriever rank metrics and token-level reader scores.

Recall@k divides by the number of relevant passages for the question (not
by k, and not capped at k). With multi-relevant gold sets this makes
recall@k and MRR@k genuinely independent: a question with six relevant
passages and one top-ranked hit scores recall 1/6 but MRR 1.0.
"""

from __future__ import annotations

import json
import string
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .analysis import RankedHit
from .errors import ValidationError

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


@dataclass(frozen=True)
class GoldQuestion:
    question_id: str
    question: str
    gold_answers: tuple[str, ...]
    relevant_passage_ids: frozenset[str]
    doc_id: str | None = None

    def __post_init__(self):
        if not self.gold_answers:
            raise ValidationError(f"{self.question_id}: gold_answers is empty")
        if not self.relevant_passage_ids:
            raise ValidationError(f"{self.question_id}: no relevant passages")


def load_gold(path: str | Path) -> list[GoldQuestion]:
    """Read a JSONL gold set, one question per line."""
    gold = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                gold.append(
                    GoldQuestion(
                        question_id=rec["question_id"],
                        question=rec["question"],
                        gold_answers=tuple(rec["gold_answers"]),
                        relevant_passage_ids=frozenset(rec["relevant_passage_ids"]),
                        doc_id=rec.get("doc_id"),
                    )
                )
            except (KeyError, json.JSONDecodeError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad gold record: {exc}")
    return gold


def save_gold(gold: Iterable[GoldQuestion], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in gold:
            rec = {
                "question_id": q.question_id,
                "question": q.question,
                "gold_answers": list(q.gold_answers),
                "relevant_passage_ids": sorted(q.relevant_passage_ids),
            }
            if q.doc_id is not None:
                rec["doc_id"] = q.doc_id
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def recall_at_k(ranked: Sequence[RankedHit], relevant: set[str], k: int) -> float:
    """Fraction of ALL relevant passages present in the top k."""
    top = {hit.passage_id for hit in ranked[:k]}
    return len(top & set(relevant)) / len(relevant)


def mrr_at_k(ranked: Sequence[RankedHit], relevant: set[str], k: int) -> float:
    """Reciprocal rank of the first relevant hit in the top k, else 0."""
    for hit in ranked[:k]:
        if hit.passage_id in relevant:
            return 1.0 / hit.rank
    return 0.0


def accuracy_at_k(ranked: Sequence[RankedHit], relevant: set[str], k: int) -> float:
    """1.0 when at least one relevant passage is in the top k, else 0.0."""
    return 1.0 if any(hit.passage_id in relevant for hit in ranked[:k]) else 0.0


def normalize_tokens(text: str) -> list[str]:
    """Lowercase, drop punctuation characters, split on whitespace."""
    return text.lower().translate(_PUNCT_TABLE).split()


def token_prf(
    predicted: str, gold_answers: Sequence[str]
) -> tuple[float, float, float]:
    """Token-multiset precision/recall/F1 against the best-matching gold.

    An empty prediction against an empty gold (a matched no-answer) scores
    (1, 1, 1); empty against non-empty (either way) scores (0, 0, 0).
    """
    pred = Counter(normalize_tokens(predicted))
    n_pred = sum(pred.values())
    best = (0.0, 0.0, 0.0)
    best_f1 = -1.0
    for gold in gold_answers:
        gold_counts = Counter(normalize_tokens(gold))
        n_gold = sum(gold_counts.values())
        if n_pred == 0 and n_gold == 0:
            triple = (1.0, 1.0, 1.0)
        elif n_pred == 0 or n_gold == 0:
            triple = (0.0, 0.0, 0.0)
        else:
            overlap = sum((pred & gold_counts).values())
            p = overlap / n_pred
            r = overlap / n_gold
            f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
            triple = (p, r, f1)
        if triple[2] > best_f1:
            best_f1 = triple[2]
            best = triple
    return best


@dataclass(frozen=True)
class RetrieverReport:
    k: int
    n_questions: int
    recall_at_k: float
    mrr_at_k: float
    accuracy: float
    per_question: tuple[dict, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ReaderReport:
    n_questions: int
    precision: float
    recall: float
    f1: float
    per_question: tuple[dict, ...] = field(default_factory=tuple)


def _check_known_ids(gold: Sequence[GoldQuestion], known_ids: set[str] | None):
    if known_ids is None:
        return
    unknown = sorted(
        pid
        for q in gold
        for pid in q.relevant_passage_ids
        if pid not in known_ids
    )
    if unknown:
        raise ValidationError(
            f"gold set references unknown passage_ids: {', '.join(unknown)}"
        )


def evaluate_retriever(
    search_fn: Callable[[str, int], list[RankedHit]],
    gold: Sequence[GoldQuestion],
    k: int = 10,
    known_ids: set[str] | None = None,
) -> RetrieverReport:
    """Macro-averaged recall@k, MRR@k and accuracy@k over a gold set.

    ``search_fn(question, k)`` must be deterministic for a fixed index.
    Questions are processed in question_id order so reports serialize
    identically across runs.
    """
    if not gold:
        raise ValidationError("gold set is empty")
    _check_known_ids(gold, known_ids)
    per_question = []
    for q in sorted(gold, key=lambda g: g.question_id):
        hits = search_fn(q.question, k)
        relevant = set(q.relevant_passage_ids)
        per_question.append(
            {
                "question_id": q.question_id,
                "recall_at_k": recall_at_k(hits, relevant, k),
                "mrr_at_k": mrr_at_k(hits, relevant, k),
                "accuracy": accuracy_at_k(hits, relevant, k),
                "top_passage_ids": [h.passage_id for h in hits],
            }
        )
    n = len(per_question)
    return RetrieverReport(
        k=k,
        n_questions=n,
        recall_at_k=sum(r["recall_at_k"] for r in per_question) / n,
        mrr_at_k=sum(r["mrr_at_k"] for r in per_question) / n,
        accuracy=sum(r["accuracy"] for r in per_question) / n,
        per_question=tuple(per_question),
    )


def evaluate_reader(
    pipeline_fn: Callable[[GoldQuestion, int], str],
    gold: Sequence[GoldQuestion],
    k: int = 10,
    known_ids: set[str] | None = None,
) -> ReaderReport:
    """Macro-averaged token P/R/F1 of the pipeline's top answer.

    ``pipeline_fn(gold_question, k)`` returns the predicted answer string
    ("" for no answer); whether it reads retrieved or gold passages is the
    caller's choice of pipeline.
    """
    if not gold:
        raise ValidationError("gold set is empty")
    _check_known_ids(gold, known_ids)
    per_question = []
    for q in sorted(gold, key=lambda g: g.question_id):
        predicted = pipeline_fn(q, k)
        p, r, f1 = token_prf(predicted, q.gold_answers)
        per_question.append(
            {
                "question_id": q.question_id,
                "predicted": predicted,
                "precision": p,
                "recall": r,
                "f1": f1,
            }
        )
    n = len(per_question)
    return ReaderReport(
        n_questions=n,
        precision=sum(r["precision"] for r in per_question) / n,
        recall=sum(r["recall"] for r in per_question) / n,
        f1=sum(r["f1"] for r in per_question) / n,
        per_question=tuple(per_question),
    )


def render_retriever_table(rows: Sequence[tuple[str, RetrieverReport]]) -> str:
    """Aligned text table, one row per evaluated retriever."""
    if not rows:
        return ""
    width = max(9, max(len(name) for name, _ in rows))
    k = rows[0][1].k
    lines = [
        f"{'Retriever':<{width}}  {f'R@{k}':>8}  {f'MRR@{k}':>8}  {'Accuracy':>8}"
    ]
    for name, report in rows:
        lines.append(
            f"{name:<{width}}  {report.recall_at_k:>8.3f}  "
            f"{report.mrr_at_k:>8.3f}  {report.accuracy:>8.3f}"
        )
    return "\n".join(lines)


def render_reader_table(rows: Sequence[tuple[str, ReaderReport]]) -> str:
    if not rows:
        return ""
    width = max(9, max(len(name) for name, _ in rows))
    lines = [f"{'Reader':<{width}}  {'Precision':>9}  {'Recall':>8}  {'F1':>8}"]
    for name, report in rows:
        lines.append(
            f"{name:<{width}}  {report.precision:>9.3f}  "
            f"{report.recall:>8.3f}  {report.f1:>8.3f}"
        )
    return "\n".join(lines)


def save_reports(reports: dict, path: str | Path) -> None:
    """Serialize report dataclasses (nested under arbitrary labels) to JSON."""

    def convert(obj):
        if isinstance(obj, (RetrieverReport, ReaderReport)):
            return asdict(obj)
        if isinstance(obj, dict):
            return {key: convert(value) for key, value in obj.items()}
        return obj

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(convert(reports), fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")

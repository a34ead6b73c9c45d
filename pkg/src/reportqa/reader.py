"""Span extraction from per-token start/end scores.

A reading-comprehension backend returns start/end logits over its token
sequence plus character offsets for context tokens; this module turns
those into ranked answer spans. The no-answer convention reserves one
position (the classifier token): a span only counts as an answer when its
start*end probability product strictly beats the classifier product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx
import numpy as np

from .analysis import RankedHit
from .errors import BackendError, IntegrityError
from .ingest import PassageStore

READER_FIXTURE_VERSION = 1


def softmax(logits: Sequence[float] | np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max-shifted)."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("softmax of empty input")
    shifted = arr - arr.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


@dataclass(frozen=True)
class ReaderOutput:
    """Raw backend output for one (question, passage) pair.

    token_spans holds a (char_start, char_end) pair into the passage text
    for each context token and None for non-context positions (question
    tokens, separators, the classifier position).
    """

    start_logits: tuple[float, ...]
    end_logits: tuple[float, ...]
    token_spans: tuple[tuple[int, int] | None, ...]
    cls_index: int

    @classmethod
    def from_dict(cls, payload: dict) -> "ReaderOutput":
        spans = []
        for entry in payload["token_spans"]:
            if entry is None or tuple(entry) == (-1, -1):
                spans.append(None)
            else:
                spans.append((int(entry[0]), int(entry[1])))
        return cls(
            start_logits=tuple(float(x) for x in payload["start_logits"]),
            end_logits=tuple(float(x) for x in payload["end_logits"]),
            token_spans=tuple(spans),
            cls_index=int(payload["cls_index"]),
        )

    def to_dict(self) -> dict:
        return {
            "start_logits": list(self.start_logits),
            "end_logits": list(self.end_logits),
            "token_spans": [list(s) if s else None for s in self.token_spans],
            "cls_index": self.cls_index,
        }


@dataclass(frozen=True)
class SpanAnswer:
    """An extracted answer span, or the no-answer marker."""

    text: str
    passage_id: str
    char_start: int | None
    char_end: int | None
    score: float
    is_no_answer: bool = False


@dataclass(frozen=True)
class DecodeConfig:
    max_answer_len: int = 30  # tokens
    n_best: int = 5


def _validate_output(output: ReaderOutput, passage_text: str) -> list[int]:
    t = len(output.start_logits)
    if t == 0:
        raise IntegrityError("reader output has no positions")
    if len(output.end_logits) != t or len(output.token_spans) != t:
        raise IntegrityError("reader output arrays disagree in length")
    if not 0 <= output.cls_index < t:
        raise IntegrityError(f"cls_index {output.cls_index} out of range for T={t}")
    context = []
    last_start = -1
    for i, span in enumerate(output.token_spans):
        if span is None:
            continue
        cs, ce = span
        if not (0 <= cs < ce <= len(passage_text)):
            raise IntegrityError(
                f"token span {span} invalid for passage of length {len(passage_text)}"
            )
        if cs < last_start:
            raise IntegrityError("token spans out of document order")
        last_start = cs
        context.append(i)
    return context


def decode_spans(
    output: ReaderOutput,
    passage_text: str,
    config: DecodeConfig = DecodeConfig(),
    passage_id: str = "",
) -> list[SpanAnswer]:
    """Rank candidate answer spans for one passage.

    Candidates are context-token pairs (s, e) with s <= e and at most
    max_answer_len tokens; each scores p_start[s] * p_end[e]. Up to n_best
    spans strictly beating the classifier product are returned, sorted by
    score (ties: earlier start, then shorter). If nothing beats it, a
    single no-answer marker carrying the classifier product is returned.
    """
    context = _validate_output(output, passage_text)
    p_start = softmax(output.start_logits)
    p_end = softmax(output.end_logits)
    no_answer_score = float(p_start[output.cls_index] * p_end[output.cls_index])

    t = len(p_start)
    ctx = np.array(context, dtype=np.intp)
    valid = np.zeros((t, t), dtype=bool)
    if ctx.size:
        valid[np.ix_(ctx, ctx)] = True
        idx = np.arange(t)
        band = (idx[None, :] >= idx[:, None]) & (
            idx[None, :] - idx[:, None] < config.max_answer_len
        )
        valid &= band

    probs = np.outer(p_start, p_end)
    valid &= probs > no_answer_score
    srows, ecols = np.nonzero(valid)
    if srows.size == 0:
        return [
            SpanAnswer(
                text="",
                passage_id=passage_id,
                char_start=None,
                char_end=None,
                score=no_answer_score,
                is_no_answer=True,
            )
        ]
    scores = probs[srows, ecols]
    order = np.lexsort((ecols - srows, srows, -scores))[: config.n_best]
    answers = []
    for pos in order:
        s, e = int(srows[pos]), int(ecols[pos])
        cs = output.token_spans[s][0]
        ce = output.token_spans[e][1]
        answers.append(
            SpanAnswer(
                text=passage_text[cs:ce],
                passage_id=passage_id,
                char_start=cs,
                char_end=ce,
                score=float(scores[pos]),
            )
        )
    return answers


class ReaderBackend:
    """Contract: produce ReaderOutput for a (question, passage text) pair."""

    def read(self, question: str, passage_text: str) -> ReaderOutput:
        raise NotImplementedError

    def ping(self) -> bool:
        return True


def no_answer_output() -> ReaderOutput:
    """Minimal valid output meaning "this passage does not answer":
    a single classifier position and no context tokens."""
    return ReaderOutput(
        start_logits=(0.0,),
        end_logits=(0.0,),
        token_spans=(None,),
        cls_index=0,
    )


class ScriptedReaderBackend(ReaderBackend):
    """Fixture-driven reader for offline runs and tests.

    The on-disk fixture maps question -> passage_id -> output; passage ids
    are resolved to passage texts at load time so reads stay keyed on
    (question, passage_text) like every other backend. Pairs missing from
    the fixture read as no-answer.
    """

    def __init__(self, outputs: dict[tuple[str, str], ReaderOutput] | None = None):
        self._outputs = dict(outputs or {})

    def add(self, question: str, passage_text: str, output: ReaderOutput) -> None:
        self._outputs[(question, passage_text)] = output

    def read(self, question: str, passage_text: str) -> ReaderOutput:
        return self._outputs.get((question, passage_text), no_answer_output())

    @classmethod
    def from_fixture(cls, path: str | Path, store: PassageStore) -> "ScriptedReaderBackend":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("kind") != "reader_fixture":
            raise IntegrityError(f"{path}: not a reader fixture file")
        if payload.get("format_version") != READER_FIXTURE_VERSION:
            raise IntegrityError(
                f"{path}: unsupported format_version {payload.get('format_version')!r}"
            )
        outputs = {}
        for question, per_passage in payload["fixtures"].items():
            for passage_id, output in per_passage.items():
                passage = store.get_passage(passage_id)
                outputs[(question, passage.text)] = ReaderOutput.from_dict(output)
        return cls(outputs)


def save_reader_fixture(
    entries: dict[str, dict[str, ReaderOutput]], path: str | Path
) -> None:
    """Write a scripted fixture: question -> passage_id -> output."""
    payload = {
        "format_version": READER_FIXTURE_VERSION,
        "kind": "reader_fixture",
        "fixtures": {
            q: {pid: out.to_dict() for pid, out in per.items()}
            for q, per in entries.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


class RemoteReaderBackend(ReaderBackend):
    """HTTP client for a hosted reading-comprehension model.

    Wire contract: POST {"question": ..., "passage": ...}; the response is
    a ReaderOutput object (logit arrays, token char spans, cls index).
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def read(self, question: str, passage_text: str) -> ReaderOutput:
        try:
            response = self._client.post(
                self.endpoint, json={"question": question, "passage": passage_text}
            )
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as exc:
            raise BackendError(
                f"reader backend request failed: {exc}", component="reader"
            ) from exc
        try:
            return ReaderOutput.from_dict(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendError(
                f"reader backend returned malformed output: {exc}", component="reader"
            ) from exc

    def ping(self) -> bool:
        try:
            self.read("ping", "ping")
            return True
        except BackendError:
            return False


def answer_on_passages(
    question: str,
    hits: list[RankedHit],
    store: PassageStore,
    backend: ReaderBackend,
    config: DecodeConfig = DecodeConfig(),
) -> tuple[list[SpanAnswer], list[str]]:
    """Read every retrieved passage and pool the extracted spans.

    Returns (answers, warnings). Answers are all non-no-answer spans
    across passages sorted by score descending (ties: retrieval order,
    then earlier and shorter span); when every passage reads as no-answer
    the list holds a single aggregate no-answer marker. A passage whose
    backend call fails is skipped with a warning; if every passage fails,
    the backend error is raised.
    """
    warnings: list[str] = []
    pooled: list[tuple[float, int, int, int, SpanAnswer]] = []
    best_no_answer = 0.0
    failures = 0
    for order, hit in enumerate(hits):
        passage = store.get_passage(hit.passage_id)
        try:
            output = backend.read(question, passage.text)
            spans = decode_spans(output, passage.text, config, passage.passage_id)
        except (BackendError, IntegrityError) as exc:
            failures += 1
            warnings.append(f"reader failed on {hit.passage_id}: {exc}")
            continue
        for span in spans:
            if span.is_no_answer:
                best_no_answer = max(best_no_answer, span.score)
            else:
                pooled.append(
                    (
                        -span.score,
                        order,
                        span.char_start,
                        span.char_end - span.char_start,
                        span,
                    )
                )
    if hits and failures == len(hits):
        raise BackendError("reader failed on every passage", component="reader")
    if not pooled:
        marker = SpanAnswer(
            text="",
            passage_id="",
            char_start=None,
            char_end=None,
            score=best_no_answer,
            is_no_answer=True,
        )
        return [marker], warnings
    pooled.sort(key=lambda entry: entry[:4])
    return [entry[4] for entry in pooled], warnings

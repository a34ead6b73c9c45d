"""Deterministic synthetic corpora with planted, verbatim answers.

Every generated artifact (documents, gold questions, scripted reader
outputs) is a pure function of the seed, so demo data and end-to-end
fixtures can be regenerated byte-for-byte. Each question carries a unique
topic token that occurs in exactly one passage, and that passage embeds
the gold answer verbatim; the scripted reader output peaks on the answer
tokens with a logit height chosen to land on a preset confidence score.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .evaluation import GoldQuestion, save_gold
from .ingest import RawDocument
from .reader import ReaderOutput, save_reader_fixture

_FILLER = (
    "system design review covers structural margins and interface loads "
    "thermal balance cases were analyzed for the cold and hot scenarios "
    "the assembly procedure requires torque verification on every fastener "
    "power distribution remains within the allocated budget during eclipse "
    "telemetry channels are sampled at the nominal housekeeping rate "
    "the qualification campaign includes vibration and vacuum cycling "
    "command sequences are validated against the operations database "
    "material selection follows the approved declared parts list "
    "redundancy switching was exercised in the closed loop test bench "
    "alignment measurements confirmed the optical bench stability"
).split()

_TOPIC_NOUNS = (
    "regulator", "manifold", "actuator", "converter", "dampener",
    "collimator", "radiator", "gimbal", "resolver", "limiter",
    "attenuator", "oscillator", "injector", "separator", "decoder",
    "balancer", "expander", "sampler", "deflector", "stabilizer",
)

_ANSWER_ADJ = ("stable", "filtered", "redundant", "calibrated", "isolated")
_ANSWER_NOUN = ("voltage margins", "torque levels", "flow rates", "gain settings")
_ANSWER_UNIT = ("volts", "newtons", "degrees", "hertz")

# Preset per-question confidence targets: a few below 0.5, most between,
# a couple above 0.99, so threshold sweeps split them non-trivially.
_SCORE_TARGETS = (
    0.15, 0.30, 0.42, 0.48, 0.55, 0.60, 0.65, 0.70, 0.74, 0.78,
    0.82, 0.85, 0.88, 0.90, 0.92, 0.94, 0.96, 0.98, 0.995, 0.998,
)

_WS_TOKEN = re.compile(r"\S+")


def whitespace_token_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of whitespace-delimited tokens."""
    return [(m.start(), m.end()) for m in _WS_TOKEN.finditer(text)]


def peaked_reader_output(
    passage_text: str,
    answer_start: int,
    answer_end: int,
    target_score: float,
) -> ReaderOutput:
    """Scripted output whose decoded top span is exactly the given answer
    characters with probability product ~= target_score.

    Position 0 is the classifier; positions 1..T are the whitespace tokens
    of the passage. One start and one end logit are raised to the height
    that makes softmax put sqrt(target_score) on each peak.
    """
    spans = whitespace_token_spans(passage_text)
    token_spans: list[tuple[int, int] | None] = [None] + spans
    t = len(token_spans)
    try:
        a_s = next(i for i, s in enumerate(spans) if s[0] == answer_start)
        a_e = next(i for i, s in enumerate(spans) if s[1] == answer_end)
    except StopIteration:
        raise ValueError("answer boundaries must align with token boundaries")
    p = math.sqrt(target_score)
    height = math.log((t - 1) * p / (1.0 - p))
    start_logits = [0.0] * t
    end_logits = [0.0] * t
    start_logits[1 + a_s] = height
    end_logits[1 + a_e] = height
    return ReaderOutput(
        start_logits=tuple(start_logits),
        end_logits=tuple(end_logits),
        token_spans=tuple(token_spans),
        cls_index=0,
    )


@dataclass
class PlantedCorpus:
    docs: list[RawDocument]
    gold: list[GoldQuestion]
    fixture: dict[str, dict[str, ReaderOutput]]  # question -> pid -> output
    target_scores: dict[str, float] = field(default_factory=dict)  # by question_id


def _sentence(rng: random.Random, n_words: int) -> str:
    words = [rng.choice(_FILLER) for _ in range(n_words)]
    return " ".join(words).capitalize() + "."


def _filler_paragraph(rng: random.Random, min_chars: int = 120) -> str:
    parts = []
    while sum(len(p) for p in parts) + len(parts) < min_chars:
        parts.append(_sentence(rng, rng.randint(9, 14)))
    return " ".join(parts)


def make_planted_corpus(
    n_passages: int = 200,
    n_questions: int = 20,
    paragraphs_per_doc: int = 20,
    seed: int = 7,
) -> PlantedCorpus:
    """Corpus + gold + scripted fixture where question i is answered
    verbatim inside one known passage and nowhere else."""
    if n_questions > n_passages:
        raise ValueError("need at least one passage per question")
    rng = random.Random(seed)
    n_docs = -(-n_passages // paragraphs_per_doc)
    doc_ids = [f"report{d:02d}" for d in range(n_docs)]

    stride = n_passages // n_questions
    planted_rows = [i * stride for i in range(n_questions)]

    questions = []
    answers = []
    for i in range(n_questions):
        topic = f"{_TOPIC_NOUNS[i % len(_TOPIC_NOUNS)]}{i:02d}"
        lo = rng.randint(2, 30)
        hi = lo + rng.randint(3, 40)
        answer = (
            f"{rng.choice(_ANSWER_ADJ)} {rng.choice(_ANSWER_NOUN)} "
            f"between {lo} and {hi} {rng.choice(_ANSWER_UNIT)}"
        )
        questions.append((topic, f"What does the {topic} subsystem provide?"))
        answers.append(answer)

    planted_by_row = {row: i for i, row in enumerate(planted_rows)}
    paragraphs: list[str] = []
    answer_offsets: dict[int, tuple[int, int]] = {}
    for row in range(n_passages):
        if row in planted_by_row:
            i = planted_by_row[row]
            topic = questions[i][0]
            prefix = (
                f"The {topic} subsystem governs the primary operating envelope. "
                f"It provides "
            )
            suffix = f" under nominal conditions. {_sentence(rng, 10)}"
            text = prefix + answers[i] + suffix
            answer_offsets[row] = (len(prefix), len(prefix) + len(answers[i]))
        else:
            text = _filler_paragraph(rng)
        paragraphs.append(text)

    docs = []
    for d, doc_id in enumerate(doc_ids):
        body = paragraphs[d * paragraphs_per_doc : (d + 1) * paragraphs_per_doc]
        docs.append(
            RawDocument(
                doc_id=doc_id,
                title=f"Technical Study {d:02d}",
                source_uri=f"https://example.org/reports/{doc_id}.pdf",
                raw_text="\n\n".join(body),
            )
        )

    gold = []
    fixture: dict[str, dict[str, ReaderOutput]] = {}
    target_scores = {}
    for i, (topic, question) in enumerate(questions):
        row = planted_rows[i]
        doc_idx, ordinal = divmod(row, paragraphs_per_doc)
        pid = f"{doc_ids[doc_idx]}:{ordinal:04d}"
        qid = f"q{i:02d}"
        target = _SCORE_TARGETS[i % len(_SCORE_TARGETS)]
        a_start, a_end = answer_offsets[row]
        output = peaked_reader_output(paragraphs[row], a_start, a_end, target)
        gold.append(
            GoldQuestion(
                question_id=qid,
                question=question,
                gold_answers=(answers[i],),
                relevant_passage_ids=frozenset({pid}),
            )
        )
        fixture.setdefault(question, {})[pid] = output
        target_scores[qid] = target

    return PlantedCorpus(
        docs=docs, gold=gold, fixture=fixture, target_scores=target_scores
    )


def save_corpus(docs: list[RawDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            rec = {
                "doc_id": doc.doc_id,
                "title": doc.title,
                "source_uri": doc.source_uri,
                "raw_text": doc.raw_text,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def write_synthetic_dataset(
    out_dir: str | Path,
    n_passages: int = 200,
    n_questions: int = 20,
    seed: int = 7,
) -> PlantedCorpus:
    """Write corpus.jsonl, gold.jsonl, and reader_fixture.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    planted = make_planted_corpus(
        n_passages=n_passages, n_questions=n_questions, seed=seed
    )
    save_corpus(planted.docs, out / "corpus.jsonl")
    save_gold(planted.gold, out / "gold.jsonl")
    save_reader_fixture(planted.fixture, out / "reader_fixture.json")
    return planted

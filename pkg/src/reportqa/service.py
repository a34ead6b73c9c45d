"""Query-time orchestration: retrieve, read, gate, and attach provenance.

The engine owns immutable components loaded at startup (passage store,
indexes, backends) and serves concurrent requests without mutating them.
Confidence gating is a presentation rule: answers scoring at or below the
threshold are still computed and returned, but in a separate gated field
the caller must explicitly reveal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import kernels
from .analysis import RankedHit
from .dense import (
    MODE_LATE,
    MODE_SINGLE,
    EmbeddingBackend,
    HashEmbedder,
    RemoteEmbedder,
    VectorIndex,
    dot_search,
    load_vector_index,
    maxsim_search,
)
from .errors import ValidationError
from .ingest import PassageStore
from .reader import (
    DecodeConfig,
    ReaderBackend,
    RemoteReaderBackend,
    ScriptedReaderBackend,
    answer_on_passages,
)
from .sparse import Bm25Params, InvertedIndex, bm25_search, load_sparse_index, tfidf_search

RETRIEVERS = ("bm25", "tfidf", "dense", "maxsim")


@dataclass(frozen=True)
class ServiceConfig:
    store_dir: str
    sparse_index: str | None = None
    dense_index: str | None = None
    late_index: str | None = None
    retriever: str = "bm25"
    reader: str = "scripted"
    reader_fixture: str | None = None
    reader_endpoint: str | None = None
    embedder: str = "hash"
    embedder_endpoint: str | None = None
    embed_dim: int = 256
    embed_seed: int = 0
    top_k: int = 10
    confidence_threshold: float = 0.5
    predefined_questions: tuple[str, ...] = ()
    max_answer_len: int = 30
    n_best: int = 5
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    static_dir: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValidationError(
                f"confidence_threshold must be in [0, 1], got {self.confidence_threshold}"
            )
        if self.top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {self.top_k}")
        if self.retriever not in RETRIEVERS:
            raise ValidationError(f"unknown retriever: {self.retriever!r}")


def load_config(path: str | Path) -> ServiceConfig:
    """Read a JSON config; relative paths resolve against the file's
    directory so a config travels with its artifacts."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    base = path.parent

    def resolve(key):
        if raw.get(key):
            raw[key] = str((base / raw[key]).resolve())

    for key in ("store_dir", "sparse_index", "dense_index", "late_index",
                "reader_fixture", "static_dir"):
        resolve(key)
    if "predefined_questions" in raw:
        raw["predefined_questions"] = tuple(raw["predefined_questions"])
    known = set(ServiceConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return ServiceConfig(**raw)


def save_config(config: ServiceConfig, path: str | Path) -> None:
    payload = {
        key: (list(value) if isinstance(value, tuple) else value)
        for key, value in config.__dict__.items()
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class AskRequest:
    question: str
    report_id: str | None = None
    top_k: int | None = None


@dataclass(frozen=True)
class AnswerView:
    """One answer as presented to a client, with provenance and the
    highlight span inside its passage."""

    text: str
    score: float
    confident: bool
    passage_id: str
    passage_text: str
    highlight: tuple[int, int]
    doc_id: str
    doc_title: str
    source_uri: str


@dataclass(frozen=True)
class AskResponse:
    best: AnswerView | None
    others: tuple[AnswerView, ...]
    low_confidence: tuple[AnswerView, ...]
    no_answer: bool
    warnings: tuple[str, ...] = ()


class Engine:
    """Retrieve-then-read pipeline over loaded, immutable components."""

    def __init__(
        self,
        config: ServiceConfig,
        store: PassageStore,
        sparse_index: InvertedIndex | None = None,
        dense_index: VectorIndex | None = None,
        late_index: VectorIndex | None = None,
        query_embedder: EmbeddingBackend | None = None,
        late_query_embedder: EmbeddingBackend | None = None,
        reader_backend: ReaderBackend | None = None,
    ):
        self.config = config
        self.store = store
        self.sparse_index = sparse_index
        self.dense_index = dense_index
        self.late_index = late_index
        self.query_embedder = query_embedder
        self.late_query_embedder = late_query_embedder
        self.reader_backend = reader_backend
        self.bm25_params = Bm25Params(k1=config.bm25_k1, b=config.bm25_b)
        self.decode_config = DecodeConfig(
            max_answer_len=config.max_answer_len, n_best=config.n_best
        )

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "Engine":
        store = PassageStore.load(config.store_dir)
        sparse_index = (
            load_sparse_index(config.sparse_index) if config.sparse_index else None
        )
        dense_index = (
            load_vector_index(config.dense_index) if config.dense_index else None
        )
        late_index = (
            load_vector_index(config.late_index) if config.late_index else None
        )

        def embedder_for(mode: str) -> EmbeddingBackend:
            if config.embedder == "remote":
                if not config.embedder_endpoint:
                    raise ValidationError("remote embedder requires embedder_endpoint")
                return RemoteEmbedder(
                    config.embedder_endpoint, mode=mode, dim=config.embed_dim
                )
            return HashEmbedder(
                dim=config.embed_dim, seed=config.embed_seed, mode=mode
            )

        query_embedder = embedder_for(MODE_SINGLE) if dense_index else None
        late_query_embedder = embedder_for(MODE_LATE) if late_index else None

        if config.reader == "remote":
            if not config.reader_endpoint:
                raise ValidationError("remote reader requires reader_endpoint")
            reader_backend: ReaderBackend = RemoteReaderBackend(config.reader_endpoint)
        elif config.reader_fixture:
            reader_backend = ScriptedReaderBackend.from_fixture(
                config.reader_fixture, store
            )
        else:
            reader_backend = ScriptedReaderBackend()
        return cls(
            config,
            store,
            sparse_index=sparse_index,
            dense_index=dense_index,
            late_index=late_index,
            query_embedder=query_embedder,
            late_query_embedder=late_query_embedder,
            reader_backend=reader_backend,
        )

    # -- retrieval dispatch -------------------------------------------------

    def search(
        self,
        question: str,
        k: int | None = None,
        retriever: str | None = None,
        allowed_ids: set[str] | None = None,
    ) -> list[RankedHit]:
        k = k or self.config.top_k
        retriever = retriever or self.config.retriever
        if retriever == "bm25":
            index = self._require(self.sparse_index, "bm25", "sparse_index")
            return bm25_search(index, self.bm25_params, question, k, allowed_ids)
        if retriever == "tfidf":
            index = self._require(self.sparse_index, "tfidf", "sparse_index")
            return tfidf_search(index, question, k, allowed_ids)
        if retriever == "dense":
            index = self._require(self.dense_index, "dense", "dense_index")
            qv = self.query_embedder.embed_query(question)
            return dot_search(index, qv, k, allowed_ids)
        if retriever == "maxsim":
            index = self._require(self.late_index, "maxsim", "late_index")
            qm = self.late_query_embedder.embed_query(question)
            return maxsim_search(index, qm, k, allowed_ids)
        raise ValidationError(f"unknown retriever: {retriever!r}")

    @staticmethod
    def _require(index, retriever: str, key: str):
        if index is None:
            raise ValidationError(f"retriever {retriever!r} requires config {key!r}")
        return index

    def _scope(self, report_id: str | None) -> set[str] | None:
        if report_id is None:
            return None
        if not self.store.has_document(report_id):
            raise ValidationError(f"unknown report_id: {report_id!r}")
        return {p.passage_id for p in self.store.list_passages(report_id)}

    # -- ask ----------------------------------------------------------------

    def ask(self, request: AskRequest) -> AskResponse:
        question = request.question.strip()
        if not question:
            raise ValidationError("question must be non-empty")
        top_k = request.top_k if request.top_k is not None else self.config.top_k
        if top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {top_k}")
        allowed = self._scope(request.report_id)
        hits = self.search(question, top_k, allowed_ids=allowed)
        answers, warnings = answer_on_passages(
            question, hits, self.store, self.reader_backend, self.decode_config
        )
        if len(answers) == 1 and answers[0].is_no_answer:
            return AskResponse(
                best=None,
                others=(),
                low_confidence=(),
                no_answer=True,
                warnings=tuple(warnings),
            )
        threshold = self.config.confidence_threshold
        views = [self._view(span, threshold) for span in answers]
        confident = [v for v in views if v.confident]
        gated = tuple(v for v in views if not v.confident)
        best = confident[0] if confident else None
        others = tuple(confident[1:])
        return AskResponse(
            best=best,
            others=others,
            low_confidence=gated,
            no_answer=False,
            warnings=tuple(warnings),
        )

    def _view(self, span, threshold: float) -> AnswerView:
        passage = self.store.get_passage(span.passage_id)
        doc = self.store.get_document(passage.doc_id)
        return AnswerView(
            text=span.text,
            score=span.score,
            confident=span.score > threshold,
            passage_id=passage.passage_id,
            passage_text=passage.text,
            highlight=(span.char_start, span.char_end),
            doc_id=doc.doc_id,
            doc_title=doc.title,
            source_uri=doc.source_uri,
        )

    # -- catalogue / introspection -------------------------------------------

    def list_reports(self) -> list[dict]:
        return [
            {
                "doc_id": d.doc_id,
                "title": d.title,
                "source_uri": d.source_uri,
                "n_passages": d.n_passages,
            }
            for d in self.store.documents()
        ]

    def predefined_questions(self) -> list[str]:
        return list(self.config.predefined_questions)

    def passage_view(self, passage_id: str) -> dict:
        passage = self.store.get_passage(passage_id)
        doc = self.store.get_document(passage.doc_id)
        return {
            "passage_id": passage.passage_id,
            "doc_id": passage.doc_id,
            "ordinal": passage.ordinal,
            "text": passage.text,
            "char_start": passage.char_start,
            "char_end": passage.char_end,
            "doc_title": doc.title,
            "source_uri": doc.source_uri,
        }

    def health(self) -> dict:
        def index_state(index):
            return {"status": "ok" if index is not None else "absent"}

        def backend_state(backend):
            if backend is None:
                return {"status": "absent"}
            return {"status": "ok" if backend.ping() else "unreachable"}

        return {
            "store": {
                "status": "ok",
                "documents": len(self.store.documents()),
                "passages": len(self.store),
            },
            "sparse_index": index_state(self.sparse_index),
            "dense_index": index_state(self.dense_index),
            "late_index": index_state(self.late_index),
            "embedder": backend_state(self.query_embedder or self.late_query_embedder),
            "reader": backend_state(self.reader_backend),
            "kernels": kernels.active_backend(),
            "retriever": self.config.retriever,
        }

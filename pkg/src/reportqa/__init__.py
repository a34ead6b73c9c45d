"""Extractive question answering over long technical reports.

Pipeline: ingest line-oriented document text into passages, retrieve
candidates with sparse (BM25, TF-IDF) or dense (dot-product,
late-interaction) indexes, extract answer spans with a pluggable reader,
gate by confidence, and serve over HTTP.
"""

from .analysis import RankedHit, analyze
from .errors import (
    BackendError,
    IntegrityError,
    NotFoundError,
    ReportQAError,
    StorageError,
    ValidationError,
)
from .ingest import (
    CorpusStats,
    IngestConfig,
    Passage,
    PassageStore,
    RawDocument,
    ingest_corpus,
    merge_lines,
    segment_paragraphs,
)
from .reader import DecodeConfig, SpanAnswer, decode_spans, softmax
from .service import AskRequest, AskResponse, Engine, ServiceConfig

__version__ = "0.1.0"

__all__ = [
    "AskRequest",
    "AskResponse",
    "BackendError",
    "CorpusStats",
    "DecodeConfig",
    "Engine",
    "IngestConfig",
    "IntegrityError",
    "NotFoundError",
    "Passage",
    "PassageStore",
    "RankedHit",
    "RawDocument",
    "ReportQAError",
    "ServiceConfig",
    "SpanAnswer",
    "StorageError",
    "ValidationError",
    "analyze",
    "decode_spans",
    "ingest_corpus",
    "merge_lines",
    "segment_paragraphs",
    "softmax",
    "__version__",
]

"""Corpus ingestion: turn line-oriented extracted text into passages.

Extraction tools emit documents as a stream of lines that does not mirror
paragraph structure. Segmentation merges wrapped lines back together,
splits on the remaining blank-line separators, and drops short paragraphs
(headers, footers, table-of-contents noise) below a length threshold.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import NotFoundError, StorageError, ValidationError

PASSAGES_FILE = "passages.jsonl"
DOCUMENTS_FILE = "documents.jsonl"
STATS_FILE = "stats.json"

_NEWLINE_RUN = re.compile(r"\n+")


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    title: str
    source_uri: str
    raw_text: str


@dataclass(frozen=True)
class Passage:
    """A paragraph of a document; the unit of retrieval and reading.

    char_start/char_end index into the document text after line merging.
    """

    passage_id: str
    doc_id: str
    ordinal: int
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class IngestConfig:
    min_chars: int = 100

    def __post_init__(self):
        if self.min_chars < 1:
            raise ValidationError(f"min_chars must be >= 1, got {self.min_chars}")


@dataclass(frozen=True)
class CorpusStats:
    n_documents: int
    n_passages: int
    n_filtered: int


@dataclass(frozen=True)
class Fragment:
    """A candidate paragraph before it becomes a stored Passage."""

    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class DocumentInfo:
    doc_id: str
    title: str
    source_uri: str
    n_passages: int


def merge_lines(raw_text: str) -> str:
    """Collapse line wrapping while preserving paragraph breaks.

    A single newline is replaced by one space; any run of two or more
    newlines is a paragraph separator, normalized to exactly two newlines.
    Total function: empty input gives empty output.
    """
    return _NEWLINE_RUN.sub(
        lambda m: " " if len(m.group()) == 1 else "\n\n", raw_text
    )


def _paragraph_candidates(merged_text: str) -> list[Fragment]:
    """All trimmed paragraphs of merged text, with offsets, before the
    length filter. Empty-after-trim paragraphs are kept here (they count
    as filtered later)."""
    if merged_text == "":
        return []
    fragments = []
    pos = 0
    for part in merged_text.split("\n\n"):
        stripped = part.strip()
        start = pos + (len(part) - len(part.lstrip()))
        fragments.append(Fragment(stripped, start, start + len(stripped)))
        pos += len(part) + 2  # skip the separator
    return fragments


def segment_paragraphs(raw_text: str, config: IngestConfig) -> list[Fragment]:
    """Merge lines, split into paragraphs, and keep those meeting the
    configured minimum length (in Unicode characters, after trimming).

    Offsets index into the merged text; fragments contain no newlines and
    appear in document order.
    """
    merged = merge_lines(raw_text)
    return [
        f for f in _paragraph_candidates(merged) if len(f.text) >= config.min_chars
    ]


class PassageStore:
    """In-memory passage store with JSONL persistence.

    Written once by ingestion, immutable afterwards; reads are safe to
    share across threads.
    """

    def __init__(self):
        self._passages: dict[str, Passage] = {}
        self._by_doc: dict[str, list[Passage]] = {}
        self._docs: dict[str, DocumentInfo] = {}
        self.stats: CorpusStats | None = None

    def __len__(self) -> int:
        return len(self._passages)

    def add_document(self, doc: RawDocument, passages: list[Passage]) -> None:
        if doc.doc_id in self._docs:
            raise ValidationError(f"duplicate doc_id: {doc.doc_id!r}")
        self._docs[doc.doc_id] = DocumentInfo(
            doc_id=doc.doc_id,
            title=doc.title,
            source_uri=doc.source_uri,
            n_passages=len(passages),
        )
        self._by_doc[doc.doc_id] = list(passages)
        for p in passages:
            self._passages[p.passage_id] = p

    def get_passage(self, passage_id: str) -> Passage:
        try:
            return self._passages[passage_id]
        except KeyError:
            raise NotFoundError(f"unknown passage_id: {passage_id!r}") from None

    def list_passages(self, doc_id: str) -> list[Passage]:
        try:
            return list(self._by_doc[doc_id])
        except KeyError:
            raise NotFoundError(f"unknown doc_id: {doc_id!r}") from None

    def has_document(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def get_document(self, doc_id: str) -> DocumentInfo:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise NotFoundError(f"unknown doc_id: {doc_id!r}") from None

    def documents(self) -> list[DocumentInfo]:
        return [self._docs[d] for d in sorted(self._docs)]

    def passages(self) -> Iterator[Passage]:
        """All passages, documents in doc_id order, passages by ordinal."""
        for doc_id in sorted(self._by_doc):
            yield from self._by_doc[doc_id]

    def passage_ids(self) -> set[str]:
        return set(self._passages)

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / PASSAGES_FILE, "w", encoding="utf-8") as fh:
            for p in self.passages():
                fh.write(json.dumps(asdict(p), ensure_ascii=False, sort_keys=True))
                fh.write("\n")
        with open(out / DOCUMENTS_FILE, "w", encoding="utf-8") as fh:
            for d in self.documents():
                fh.write(json.dumps(asdict(d), ensure_ascii=False, sort_keys=True))
                fh.write("\n")
        if self.stats is not None:
            with open(out / STATS_FILE, "w", encoding="utf-8") as fh:
                json.dump(asdict(self.stats), fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def load(cls, store_dir: str | Path) -> "PassageStore":
        src = Path(store_dir)
        store = cls()
        docs: dict[str, DocumentInfo] = {}
        with open(src / DOCUMENTS_FILE, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                docs[rec["doc_id"]] = DocumentInfo(**rec)
        passages_by_doc: dict[str, list[Passage]] = {d: [] for d in docs}
        with open(src / PASSAGES_FILE, encoding="utf-8") as fh:
            for line in fh:
                p = Passage(**json.loads(line))
                passages_by_doc.setdefault(p.doc_id, []).append(p)
        for doc_id, info in docs.items():
            plist = sorted(passages_by_doc.get(doc_id, []), key=lambda p: p.ordinal)
            store._docs[doc_id] = info
            store._by_doc[doc_id] = plist
            for p in plist:
                store._passages[p.passage_id] = p
        stats_path = src / STATS_FILE
        if stats_path.exists():
            with open(stats_path, encoding="utf-8") as fh:
                store.stats = CorpusStats(**json.load(fh))
        return store


def make_passage_id(doc_id: str, ordinal: int) -> str:
    # zero-padded so lexicographic order matches ordinal order
    return f"{doc_id}:{ordinal:04d}"


def ingest_corpus(
    docs: Iterable[RawDocument],
    config: IngestConfig,
    store: PassageStore,
) -> CorpusStats:
    """Segment every document and persist the passages into ``store``.

    Deterministic and idempotent: the same input always yields the same
    passage ids and counts. Duplicate doc_ids are rejected up front.
    """
    docs = list(docs)
    seen: set[str] = set()
    for doc in docs:
        if not doc.doc_id:
            raise ValidationError("doc_id must be non-empty")
        if doc.doc_id in seen or store.has_document(doc.doc_id):
            raise ValidationError(f"duplicate doc_id: {doc.doc_id!r}")
        seen.add(doc.doc_id)

    n_passages = 0
    n_filtered = 0
    for doc in docs:
        merged = merge_lines(doc.raw_text)
        candidates = _paragraph_candidates(merged)
        kept = [f for f in candidates if len(f.text) >= config.min_chars]
        n_filtered += len(candidates) - len(kept)
        passages = [
            Passage(
                passage_id=make_passage_id(doc.doc_id, i),
                doc_id=doc.doc_id,
                ordinal=i,
                text=f.text,
                char_start=f.char_start,
                char_end=f.char_end,
            )
            for i, f in enumerate(kept)
        ]
        try:
            store.add_document(doc, passages)
        except ValidationError:
            raise
        except Exception as exc:
            raise StorageError(
                f"failed to store document {doc.doc_id!r}: {exc}", doc_id=doc.doc_id
            ) from exc
        n_passages += len(passages)

    stats = CorpusStats(
        n_documents=len(docs), n_passages=n_passages, n_filtered=n_filtered
    )
    store.stats = stats
    return stats


def load_corpus(path: str | Path) -> list[RawDocument]:
    """Read a JSONL corpus file: one document object per line with fields
    doc_id, title, source_uri, raw_text."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                docs.append(
                    RawDocument(
                        doc_id=rec["doc_id"],
                        title=rec.get("title", ""),
                        source_uri=rec.get("source_uri", ""),
                        raw_text=rec["raw_text"],
                    )
                )
            except (KeyError, json.JSONDecodeError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad corpus record: {exc}")
    return docs

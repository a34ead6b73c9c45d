"""Embedding-based passage retrieval.

A flat exact vector index with two scoring paths: single-vector dot
product, and late-interaction MaxSim (per query token, the best dot
product against any passage token, summed over query tokens). Embedding
backends are pluggable: a deterministic feature-hashing embedder for
offline use and tests, and an HTTP client for hosted bi-encoders.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import httpx
import numpy as np

from . import kernels
from .analysis import RankedHit, analyze, rank_hits, select_top_rows
from .errors import BackendError, IntegrityError, ValidationError
from .ingest import Passage

DENSE_FORMAT_VERSION = 1
MODE_SINGLE = "single"
MODE_LATE = "late_interaction"


class EmbeddingBackend:
    """Contract for query/passage encoders.

    ``mode`` is "single" (one vector per text) or "late_interaction" (one
    vector per token); ``dim`` is constant across calls, and identical
    inputs must produce identical outputs.
    """

    mode: str
    dim: int

    def embed_query(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_passage(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_passages(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed_passage(t) for t in texts]

    def ping(self) -> bool:
        return True


def _hash_token(token: str, dim: int, seed: int) -> tuple[int, float]:
    digest = hashlib.blake2b(
        f"{seed}:{token}".encode("utf-8"), digest_size=8
    ).digest()
    value = int.from_bytes(digest, "big")
    bucket = value % dim
    sign = 1.0 if (value >> 63) & 1 == 0 else -1.0
    return bucket, sign


def hash_embed(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Feature-hash a text into a single L2-normalized vector.

    Each token lands in one of ``dim`` buckets with a hash-derived sign;
    a text with no tokens embeds as the zero vector.
    """
    if dim < 2:
        raise ValidationError(f"dim must be >= 2, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for token in analyze(text):
        bucket, sign = _hash_token(token, dim, seed)
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def hash_embed_tokens(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Token-wise variant: one unit vector per token, shape (T, dim)."""
    if dim < 2:
        raise ValidationError(f"dim must be >= 2, got {dim}")
    tokens = analyze(text)
    out = np.zeros((len(tokens), dim), dtype=np.float64)
    for i, token in enumerate(tokens):
        bucket, sign = _hash_token(token, dim, seed)
        out[i, bucket] = sign
    return out


class HashEmbedder(EmbeddingBackend):
    """Deterministic offline embedding backend built on feature hashing."""

    def __init__(self, dim: int = 256, seed: int = 0, mode: str = MODE_SINGLE):
        if mode not in (MODE_SINGLE, MODE_LATE):
            raise ValidationError(f"unknown embedding mode: {mode!r}")
        if dim < 2:
            raise ValidationError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self.mode = mode

    def _embed(self, text: str) -> np.ndarray:
        if self.mode == MODE_SINGLE:
            return hash_embed(text, self.dim, self.seed)
        return hash_embed_tokens(text, self.dim, self.seed)

    embed_query = _embed
    embed_passage = _embed


class RemoteEmbedder(EmbeddingBackend):
    """HTTP client for a hosted bi-encoder.

    Wire contract: POST {"texts": [...], "mode": "query"|"passage"} to the
    endpoint; response carries {"vectors": [[...]]} in single mode or
    {"token_vectors": [[[...]]]} in late-interaction mode. Every returned
    vector is validated against the declared dimension before use.
    """

    def __init__(
        self,
        endpoint: str,
        mode: str,
        dim: int,
        batch_size: int = 32,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        if mode not in (MODE_SINGLE, MODE_LATE):
            raise ValidationError(f"unknown embedding mode: {mode!r}")
        self.endpoint = endpoint
        self.mode = mode
        self.dim = dim
        self.batch_size = batch_size
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _request(self, texts: Sequence[str], kind: str) -> list[np.ndarray]:
        try:
            response = self._client.post(
                self.endpoint, json={"texts": list(texts), "mode": kind}
            )
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as exc:
            raise BackendError(
                f"embedding backend request failed: {exc}", component="embedder"
            ) from exc
        key = "vectors" if self.mode == MODE_SINGLE else "token_vectors"
        if key not in payload:
            raise BackendError(
                f"embedding backend response missing {key!r}", component="embedder"
            )
        rows = payload[key]
        if len(rows) != len(texts):
            raise BackendError(
                f"embedding backend returned {len(rows)} results for "
                f"{len(texts)} texts",
                component="embedder",
            )
        out = []
        for row in rows:
            arr = np.asarray(row, dtype=np.float64)
            if self.mode == MODE_SINGLE:
                if arr.shape != (self.dim,):
                    raise IntegrityError(
                        f"expected vector of dim {self.dim}, got shape {arr.shape}"
                    )
            else:
                if arr.ndim != 2 or (arr.size and arr.shape[1] != self.dim):
                    raise IntegrityError(
                        f"expected token vectors of dim {self.dim}, got shape {arr.shape}"
                    )
                arr = arr.reshape(-1, self.dim)
            out.append(arr)
        return out

    def embed_query(self, text: str) -> np.ndarray:
        return self._request([text], "query")[0]

    def embed_passage(self, text: str) -> np.ndarray:
        return self._request([text], "passage")[0]

    def embed_passages(self, texts: Sequence[str]) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for i in range(0, len(texts), self.batch_size):
            out.extend(self._request(texts[i : i + self.batch_size], "passage"))
        return out

    def ping(self) -> bool:
        try:
            self._request(["ping"], "query")
            return True
        except (BackendError, IntegrityError):
            return False


class VectorIndex:
    """Flat exact vector index; all entries share one dimension and mode.

    Single mode stores an (N, d) matrix; late-interaction mode stores one
    packed (T_total, d) token matrix with per-passage row offsets.
    """

    def __init__(
        self,
        ids: list[str],
        mode: str,
        dim: int,
        vectors: np.ndarray | None = None,
        token_matrix: np.ndarray | None = None,
        offsets: np.ndarray | None = None,
    ):
        self.ids = list(ids)
        self.mode = mode
        self.dim = dim
        self._row_of = {pid: r for r, pid in enumerate(self.ids)}
        if mode == MODE_SINGLE:
            assert vectors is not None
            if vectors.shape != (len(ids), dim):
                raise IntegrityError(
                    f"vector matrix shape {vectors.shape} != ({len(ids)}, {dim})"
                )
            self.vectors = np.ascontiguousarray(vectors, dtype=np.float64)
            self.token_matrix = None
            self.offsets = None
        elif mode == MODE_LATE:
            assert token_matrix is not None and offsets is not None
            if offsets.shape != (len(ids) + 1,):
                raise IntegrityError("offsets must have one entry per passage + 1")
            if token_matrix.ndim != 2 or token_matrix.shape[1] != dim:
                raise IntegrityError(
                    f"token matrix shape {token_matrix.shape} incompatible with dim {dim}"
                )
            self.vectors = None
            self.token_matrix = np.ascontiguousarray(token_matrix, dtype=np.float64)
            self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        else:
            raise ValidationError(f"unknown index mode: {mode!r}")

    def __len__(self) -> int:
        return len(self.ids)

    def token_vectors(self, passage_id: str) -> np.ndarray:
        if self.mode != MODE_LATE:
            raise IntegrityError("token_vectors requires a late-interaction index")
        row = self._row_of[passage_id]
        return self.token_matrix[self.offsets[row] : self.offsets[row + 1]]


def build_vector_index(
    passages: Iterable[Passage], backend: EmbeddingBackend
) -> VectorIndex:
    """Embed every passage (in backend-sized batches) and assemble the
    flat index, order-stable. A failing batch is reported by the
    passage_id it starts at."""
    passages = list(passages)
    ids = [p.passage_id for p in passages]
    if len(ids) != len(set(ids)):
        raise ValidationError("duplicate passage_id in index input")
    texts = [p.text for p in passages]
    batch_size = getattr(backend, "batch_size", None) or 64
    embedded = []
    for start in range(0, len(texts), batch_size):
        try:
            embedded.extend(backend.embed_passages(texts[start : start + batch_size]))
        except IntegrityError:
            raise
        except Exception as exc:
            raise BackendError(
                f"embedding failed for batch starting at {ids[start]}: {exc}",
                component="embedder",
            ) from exc

    if backend.mode == MODE_SINGLE:
        vectors = np.zeros((len(ids), backend.dim), dtype=np.float64)
        for row, (pid, vec) in enumerate(zip(ids, embedded)):
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (backend.dim,):
                raise IntegrityError(
                    f"passage {pid}: vector shape {arr.shape} != ({backend.dim},)"
                )
            vectors[row] = arr
        return VectorIndex(ids, MODE_SINGLE, backend.dim, vectors=vectors)

    mats = []
    offsets = np.zeros(len(ids) + 1, dtype=np.int64)
    for row, (pid, mat) in enumerate(zip(ids, embedded)):
        arr = np.asarray(mat, dtype=np.float64).reshape(-1, backend.dim)
        mats.append(arr)
        offsets[row + 1] = offsets[row] + arr.shape[0]
    token_matrix = (
        np.concatenate(mats, axis=0)
        if mats
        else np.zeros((0, backend.dim), dtype=np.float64)
    )
    return VectorIndex(
        ids, MODE_LATE, backend.dim, token_matrix=token_matrix, offsets=offsets
    )


def _dense_rank(
    index: VectorIndex,
    scores: np.ndarray,
    k: int,
    allowed_ids: Iterable[str] | None,
) -> list[RankedHit]:
    if allowed_ids is None:
        rows = np.arange(len(index.ids))
    else:
        allowed = set(allowed_ids)
        rows = np.array(
            [r for r, pid in enumerate(index.ids) if pid in allowed], dtype=np.intp
        )
    rows = select_top_rows(scores, rows, k)
    pairs = [(index.ids[r], float(scores[r])) for r in rows]
    return rank_hits(pairs, k)


def dot_search(
    index: VectorIndex,
    query_vec: np.ndarray,
    k: int,
    allowed_ids: Iterable[str] | None = None,
) -> list[RankedHit]:
    """Exact top-k by dot product over a single-vector index."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if index.mode != MODE_SINGLE:
        raise IntegrityError("dot_search requires a single-vector index")
    qv = np.asarray(query_vec, dtype=np.float64)
    if qv.shape != (index.dim,):
        raise IntegrityError(f"query vector shape {qv.shape} != ({index.dim},)")
    if len(index.ids) == 0:
        return []
    scores = index.vectors @ qv
    return _dense_rank(index, scores, k, allowed_ids)


def maxsim_search(
    index: VectorIndex,
    query_token_vecs: np.ndarray,
    k: int,
    allowed_ids: Iterable[str] | None = None,
) -> list[RankedHit]:
    """Exact top-k by late-interaction MaxSim.

    score(q, p) = sum over query tokens of the max dot product against
    any token of p; passages without tokens score 0.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if index.mode != MODE_LATE:
        raise IntegrityError("maxsim_search requires a late-interaction index")
    qm = np.asarray(query_token_vecs, dtype=np.float64)
    if qm.ndim != 2 or (qm.size and qm.shape[1] != index.dim):
        raise IntegrityError(
            f"query token matrix shape {qm.shape} incompatible with dim {index.dim}"
        )
    qm = np.ascontiguousarray(qm.reshape(-1, index.dim))
    if len(index.ids) == 0:
        return []
    scores = kernels.maxsim_scores(qm, index.token_matrix, index.offsets)
    return _dense_rank(index, scores, k, allowed_ids)


def save_vector_index(index: VectorIndex, path: str | Path) -> None:
    """One JSON header line followed by raw array payload(s)."""
    header = {
        "format_version": DENSE_FORMAT_VERSION,
        "kind": "dense_index",
        "mode": index.mode,
        "dim": index.dim,
        "count": len(index.ids),
        "ids": index.ids,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        if index.mode == MODE_SINGLE:
            np.save(fh, index.vectors)
        else:
            np.save(fh, index.offsets)
            np.save(fh, index.token_matrix)


def load_vector_index(path: str | Path) -> VectorIndex:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("kind") != "dense_index":
            raise IntegrityError(f"{path}: not a dense index file")
        if header.get("format_version") != DENSE_FORMAT_VERSION:
            raise IntegrityError(
                f"{path}: unsupported format_version {header.get('format_version')!r}"
            )
        ids = header["ids"]
        mode = header["mode"]
        dim = header["dim"]
        if mode == MODE_SINGLE:
            vectors = np.load(fh, allow_pickle=False)
            return VectorIndex(ids, mode, dim, vectors=vectors)
        offsets = np.load(fh, allow_pickle=False)
        token_matrix = np.load(fh, allow_pickle=False)
        return VectorIndex(
            ids, mode, dim, token_matrix=token_matrix, offsets=offsets
        )

import json

import httpx
import numpy as np
import pytest

from conftest import make_passages
from oracles import dot_oracle_scores, maxsim_oracle_scores, rank_oracle
from reportqa.dense import (
    MODE_LATE,
    MODE_SINGLE,
    HashEmbedder,
    RemoteEmbedder,
    VectorIndex,
    build_vector_index,
    dot_search,
    hash_embed,
    hash_embed_tokens,
    load_vector_index,
    maxsim_search,
    save_vector_index,
)
from reportqa.errors import BackendError, IntegrityError, ValidationError

class TestHashEmbed:
    def test_deterministic(self):
        a = hash_embed("orbit thermal panel", 64, seed=3)
        b = hash_embed("orbit thermal panel", 64, seed=3)
        np.testing.assert_array_equal(a, b)

    def test_unit_norm_for_nonempty(self):
        vec = hash_embed("torque margin", 32)
        assert np.linalg.norm(vec) == pytest.approx(1.0)

    def test_zero_vector_for_empty(self):
        assert not hash_embed("...", 16).any()

    def test_seed_changes_embedding(self):
        a = hash_embed("orbit panel", 64, seed=0)
        b = hash_embed("orbit panel", 64, seed=1)
        assert not np.array_equal(a, b)

    def test_token_variant_rows_are_unit(self):
        mat = hash_embed_tokens("orbit thermal panel", 32)
        assert mat.shape == (3, 32)
        np.testing.assert_allclose(np.linalg.norm(mat, axis=1), 1.0)

    def test_dim_validated(self):
        with pytest.raises(ValidationError):
            hash_embed("x", 1)

    def test_disjoint_vocab_mostly_orthogonal(self):
        rng = np.random.default_rng(0)
        dots = []
        for _ in range(200):
            left = "".join(rng.choice(list("abcdefgh"), size=8))
            right = "".join(rng.choice(list("qrstuvwx"), size=8))
            dots.append(
                abs(float(hash_embed(left, 256) @ hash_embed(right, 256)))
            )
        assert float(np.mean(dots)) < 0.2


class TestBuildIndex:
    def test_shape_and_metadata(self):
        idx = build_vector_index(
            make_passages(["orbit", "panel", "torque"]), HashEmbedder(dim=8)
        )
        assert idx.mode == MODE_SINGLE
        assert idx.dim == 8
        assert idx.vectors.shape == (3, 8)

    def test_empty_corpus(self):
        idx = build_vector_index([], HashEmbedder(dim=8))
        assert len(idx) == 0
        assert dot_search(idx, np.zeros(8), 5) == []

    def test_rebuild_bitwise_identical(self):
        passages = make_passages(["orbit panel", "valve"])
        a = build_vector_index(passages, HashEmbedder(dim=16, seed=2))
        b = build_vector_index(passages, HashEmbedder(dim=16, seed=2))
        np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_duplicate_ids_rejected(self):
        passages = make_passages(["a", "b"])
        passages[1] = passages[0]
        with pytest.raises(ValidationError):
            build_vector_index(passages, HashEmbedder(dim=8))

    def test_late_mode_packs_offsets(self):
        idx = build_vector_index(
            make_passages(["orbit panel", "valve", ""]),
            HashEmbedder(dim=8, mode=MODE_LATE),
        )
        assert idx.mode == MODE_LATE
        assert list(idx.offsets) == [0, 2, 3, 3]
        assert idx.token_vectors("doc:0000").shape == (2, 8)

    def test_failing_batch_reported_by_passage_id(self):
        class Flaky(HashEmbedder):
            batch_size = 2

            def embed_passages(self, texts):
                if any("poison" in t for t in texts):
                    raise RuntimeError("encoder crashed")
                return super().embed_passages(texts)

        passages = make_passages(["orbit", "panel", "poison pill", "valve"])
        with pytest.raises(BackendError, match="doc:0002"):
            build_vector_index(passages, Flaky(dim=8))


class TestDotSearch:
    def test_orthonormal_basis(self):
        vectors = np.eye(3)
        idx = VectorIndex(["p1", "p2", "p3"], MODE_SINGLE, 3, vectors=vectors)
        hits = dot_search(idx, np.array([0.0, 1.0, 0.0]), 1)
        assert hits[0].passage_id == "p2"
        assert hits[0].score == pytest.approx(1.0)

    def test_zero_query_tie_break_order(self):
        vectors = np.ones((3, 2))
        idx = VectorIndex(["b", "a", "c"], MODE_SINGLE, 2, vectors=vectors)
        hits = dot_search(idx, np.zeros(2), 3)
        assert [h.passage_id for h in hits] == ["a", "b", "c"]
        assert all(h.score == 0.0 for h in hits)

    def test_dimension_mismatch(self):
        idx = VectorIndex(["p"], MODE_SINGLE, 4, vectors=np.ones((1, 4)))
        with pytest.raises(IntegrityError):
            dot_search(idx, np.ones(3), 1)

    def test_mode_mismatch(self):
        idx = VectorIndex(
            ["p"], MODE_LATE, 2,
            token_matrix=np.ones((1, 2)), offsets=np.array([0, 1]),
        )
        with pytest.raises(IntegrityError):
            dot_search(idx, np.ones(2), 1)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            n = int(rng.integers(2, 50))
            vectors = rng.normal(size=(n, 16))
            ids = [f"p{i:03d}" for i in range(n)]
            idx = VectorIndex(ids, MODE_SINGLE, 16, vectors=vectors)
            for _ in range(5):
                q = rng.normal(size=16)
                want = rank_oracle(
                    dot_oracle_scores(ids, vectors, q), 10, positive_only=False
                )
                got = dot_search(idx, q, 10)
                assert [(h.passage_id, h.rank) for h in got] == [
                    (pid, rank) for pid, _, rank in want
                ]
                for hit, (_, score, _) in zip(got, want):
                    assert abs(hit.score - score) < 1e-9

    def test_appending_passage_keeps_relative_order(self):
        rng = np.random.default_rng(7)
        vectors = rng.normal(size=(10, 8))
        ids = [f"p{i}" for i in range(10)]
        q = rng.normal(size=8)
        base = dot_search(VectorIndex(ids, MODE_SINGLE, 8, vectors=vectors), q, 10)
        extended = VectorIndex(
            ids + ["extra"],
            MODE_SINGLE,
            8,
            vectors=np.vstack([vectors, rng.normal(size=(1, 8))]),
        )
        wider = dot_search(extended, q, 11)
        base_order = [h.passage_id for h in base]
        wider_order = [h.passage_id for h in wider if h.passage_id != "extra"]
        assert base_order == wider_order


def _random_late_instance(rng, n_passages=5, max_tokens=6, dim=8):
    ids = [f"p{i}" for i in range(n_passages)]
    mats = [
        rng.normal(size=(int(rng.integers(0, max_tokens + 1)), dim))
        for _ in range(n_passages)
    ]
    offsets = np.zeros(n_passages + 1, dtype=np.int64)
    for i, m in enumerate(mats):
        offsets[i + 1] = offsets[i] + m.shape[0]
    packed = (
        np.concatenate([m for m in mats], axis=0)
        if sum(m.shape[0] for m in mats)
        else np.zeros((0, dim))
    )
    idx = VectorIndex(ids, MODE_LATE, dim, token_matrix=packed, offsets=offsets)
    return ids, mats, idx


class TestMaxsimSearch:
    def test_single_token_query_reduces_to_max(self):
        rng = np.random.default_rng(1)
        ids, mats, idx = _random_late_instance(rng)
        q = rng.normal(size=(1, 8))
        hits = maxsim_search(idx, q, 5)
        by_id = {h.passage_id: h.score for h in hits}
        for pid, mat in zip(ids, mats):
            expected = float(np.max(mat @ q[0])) if mat.shape[0] else 0.0
            assert by_id[pid] == pytest.approx(expected, abs=1e-12)

    def test_duplicated_query_tokens_double_score(self):
        rng = np.random.default_rng(2)
        _, _, idx = _random_late_instance(rng)
        q = rng.normal(size=(3, 8))
        single = {h.passage_id: h.score for h in maxsim_search(idx, q, 5)}
        doubled = {
            h.passage_id: h.score
            for h in maxsim_search(idx, np.vstack([q, q]), 5)
        }
        for pid in single:
            assert abs(doubled[pid] - 2.0 * single[pid]) < 1e-9

    def test_mode_mismatch_raises(self):
        idx = VectorIndex(["p"], MODE_SINGLE, 2, vectors=np.ones((1, 2)))
        with pytest.raises(IntegrityError):
            maxsim_search(idx, np.ones((1, 2)), 1)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            ids, mats, idx = _random_late_instance(rng)
            q = rng.normal(size=(3, 8))
            want = rank_oracle(
                maxsim_oracle_scores(ids, mats, q), 5, positive_only=False
            )
            got = maxsim_search(idx, q, 5)
            assert [(h.passage_id, h.rank) for h in got] == [
                (pid, rank) for pid, _, rank in want
            ]
            for hit, (_, score, _) in zip(got, want):
                assert abs(hit.score - score) < 1e-9

    def test_per_token_maxima_bounded_by_best_pair(self):
        rng = np.random.default_rng(4)
        ids, mats, idx = _random_late_instance(rng)
        q = rng.normal(size=(4, 8))
        for pid, mat in zip(ids, mats):
            if mat.shape[0] == 0:
                continue
            sims = q @ mat.T
            per_token_max = sims.max(axis=1)
            assert per_token_max.max() <= sims.max() + 1e-12
            score = [h.score for h in maxsim_search(idx, q, 5) if h.passage_id == pid]
            assert score[0] == pytest.approx(float(per_token_max.sum()), abs=1e-9)


class TestPersistence:
    def test_single_roundtrip(self, tmp_path):
        idx = build_vector_index(
            make_passages(["orbit panel", "valve"]), HashEmbedder(dim=16)
        )
        path = tmp_path / "dense.bin"
        save_vector_index(idx, path)
        loaded = load_vector_index(path)
        assert loaded.ids == idx.ids
        np.testing.assert_array_equal(loaded.vectors, idx.vectors)

    def test_late_roundtrip(self, tmp_path):
        idx = build_vector_index(
            make_passages(["orbit panel", "", "valve margin filter"]),
            HashEmbedder(dim=8, mode=MODE_LATE),
        )
        path = tmp_path / "late.bin"
        save_vector_index(idx, path)
        loaded = load_vector_index(path)
        np.testing.assert_array_equal(loaded.offsets, idx.offsets)
        np.testing.assert_array_equal(loaded.token_matrix, idx.token_matrix)

    def test_byte_identical_across_runs(self, tmp_path):
        passages = make_passages(["orbit panel", "valve"])
        paths = []
        for name in ("a.bin", "b.bin"):
            path = tmp_path / name
            save_vector_index(
                build_vector_index(passages, HashEmbedder(dim=16, seed=1)), path
            )
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]

    def test_header_is_self_describing(self, tmp_path):
        idx = build_vector_index(make_passages(["orbit"]), HashEmbedder(dim=8))
        path = tmp_path / "dense.bin"
        save_vector_index(idx, path)
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
        assert header["mode"] == MODE_SINGLE
        assert header["dim"] == 8
        assert header["count"] == 1
        assert header["format_version"] == 1


class _StubEmbedServer:
    """httpx MockTransport handler implementing the embedding wire contract."""

    def __init__(self, dim=4, mode=MODE_SINGLE, fail=False):
        self.dim = dim
        self.mode = mode
        self.fail = fail
        self.requests = []

    def __call__(self, request: httpx.Request) -> httpx.Response:
        if self.fail:
            return httpx.Response(500, json={"error": "backend down"})
        payload = json.loads(request.content)
        self.requests.append(payload)
        texts = payload["texts"]
        if self.mode == MODE_SINGLE:
            return httpx.Response(
                200, json={"vectors": [[float(len(t))] * self.dim for t in texts]}
            )
        return httpx.Response(
            200,
            json={
                "token_vectors": [
                    [[float(i + 1)] * self.dim for i in range(len(t.split()))]
                    for t in texts
                ]
            },
        )


class TestRemoteEmbedder:
    def test_single_mode_roundtrip(self):
        server = _StubEmbedServer(dim=4)
        emb = RemoteEmbedder(
            "http://emb.test/embed", mode=MODE_SINGLE, dim=4,
            transport=httpx.MockTransport(server),
        )
        vec = emb.embed_query("orbit")
        assert vec.shape == (4,)
        assert server.requests[-1]["mode"] == "query"

    def test_batching(self):
        server = _StubEmbedServer(dim=4)
        emb = RemoteEmbedder(
            "http://emb.test/embed", mode=MODE_SINGLE, dim=4, batch_size=2,
            transport=httpx.MockTransport(server),
        )
        out = emb.embed_passages(["a", "bb", "ccc", "dddd", "eeeee"])
        assert len(out) == 5
        assert [len(r["texts"]) for r in server.requests] == [2, 2, 1]
        assert all(r["mode"] == "passage" for r in server.requests)

    def test_dimension_validated(self):
        server = _StubEmbedServer(dim=3)
        emb = RemoteEmbedder(
            "http://emb.test/embed", mode=MODE_SINGLE, dim=8,
            transport=httpx.MockTransport(server),
        )
        with pytest.raises(IntegrityError):
            emb.embed_query("orbit")

    def test_http_failure_is_backend_error(self):
        server = _StubEmbedServer(fail=True)
        emb = RemoteEmbedder(
            "http://emb.test/embed", mode=MODE_SINGLE, dim=4,
            transport=httpx.MockTransport(server),
        )
        with pytest.raises(BackendError) as err:
            emb.embed_query("orbit")
        assert err.value.component == "embedder"
        assert emb.ping() is False

    def test_late_mode(self):
        server = _StubEmbedServer(dim=4, mode=MODE_LATE)
        emb = RemoteEmbedder(
            "http://emb.test/embed", mode=MODE_LATE, dim=4,
            transport=httpx.MockTransport(server),
        )
        mat = emb.embed_passage("two tokens")
        assert mat.shape == (2, 4)

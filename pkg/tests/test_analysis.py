import pytest
from hypothesis import given, strategies as st

from oracles import tokenize as oracle_tokenize
from reportqa.analysis import RankedHit, analyze, rank_hits


class TestAnalyze:
    def test_basic(self):
        assert analyze("Ariane 5 launcher.") == ["ariane", "5", "launcher"]

    def test_empty(self):
        assert analyze("") == []

    def test_hyphen_splits_micro_sign_survives(self):
        assert analyze("20-200µm") == ["20", "200µm"]

    def test_underscore_splits(self):
        assert analyze("a_b") == ["a", "b"]

    def test_domain_identifiers_survive(self):
        assert analyze("the XB-CryoSensor42 head") == [
            "the",
            "xb",
            "cryosensor42",
            "head",
        ]

    @given(st.text(max_size=200))
    def test_agrees_with_groupby_tokenizer(self, text):
        assert analyze(text) == oracle_tokenize(text)

    @given(st.text(max_size=200))
    def test_tokens_lowercase_no_whitespace(self, text):
        for token in analyze(text):
            assert token
            assert token == token.lower()
            assert not any(c.isspace() for c in token)


class TestRankHits:
    def test_orders_by_score_then_id(self):
        hits = rank_hits([("b", 1.0), ("a", 1.0), ("c", 2.0)], k=10)
        assert [(h.passage_id, h.rank) for h in hits] == [
            ("c", 1),
            ("a", 2),
            ("b", 3),
        ]

    def test_truncates_to_k(self):
        hits = rank_hits([(str(i), float(i)) for i in range(10)], k=3)
        assert len(hits) == 3
        assert hits[0].score == 9.0

    def test_ranks_contiguous(self):
        hits = rank_hits([("x", 0.5), ("y", 0.25)], k=5)
        assert [h.rank for h in hits] == [1, 2]

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            rank_hits([("x", 1.0)], k=0)

    def test_hit_is_frozen(self):
        hit = RankedHit("p", 1.0, 1)
        with pytest.raises(AttributeError):
            hit.score = 2.0

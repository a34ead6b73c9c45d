import pytest
from hypothesis import given, strategies as st

from reportqa.analysis import RankedHit
from reportqa.errors import ValidationError
from reportqa.evaluation import (
    GoldQuestion,
    accuracy_at_k,
    evaluate_reader,
    evaluate_retriever,
    load_gold,
    mrr_at_k,
    recall_at_k,
    render_reader_table,
    render_retriever_table,
    save_gold,
    token_prf,
)


def ranking(ids):
    return [RankedHit(pid, float(len(ids) - i), i + 1) for i, pid in enumerate(ids)]


TOP10 = list("abcdefghij")

# (ranked ids, relevant, k, recall, mrr, accuracy) — all values hand-computed
RANKING_FIXTURES = [
    (TOP10, {"a"}, 10, 1.0, 1.0, 1.0),
    (TOP10, {"b"}, 10, 1.0, 0.5, 1.0),
    (TOP10, {"a", "b", "y", "z"}, 10, 0.5, 1.0, 1.0),
    (TOP10, {"z"}, 10, 0.0, 0.0, 0.0),
    (TOP10, {"c", "x"}, 10, 0.5, 1.0 / 3.0, 1.0),
    (TOP10, {"j"}, 10, 1.0, 0.1, 1.0),
    (TOP10 + ["k"], {"k"}, 10, 0.0, 0.0, 0.0),
    (TOP10, {"a", "b"}, 10, 1.0, 1.0, 1.0),
    (TOP10, {"d"}, 3, 0.0, 0.0, 0.0),
    (TOP10, {"a", "c", "e", "x", "y", "z"}, 10, 0.5, 1.0, 1.0),
]


class TestRankMetrics:
    @pytest.mark.parametrize(
        "ids,relevant,k,want_recall,want_mrr,want_acc", RANKING_FIXTURES
    )
    def test_hand_computed_fixtures(
        self, ids, relevant, k, want_recall, want_mrr, want_acc
    ):
        ranked = ranking(ids)
        assert recall_at_k(ranked, relevant, k) == want_recall
        assert mrr_at_k(ranked, relevant, k) == want_mrr
        assert accuracy_at_k(ranked, relevant, k) == want_acc

    def test_metrics_non_decreasing_in_k(self):
        ranked = ranking(TOP10)
        relevant = {"c", "g", "z"}
        for metric in (recall_at_k, mrr_at_k, accuracy_at_k):
            values = [metric(ranked, relevant, k) for k in range(1, 11)]
            assert values == sorted(values)

    def test_accuracy_equals_mrr_positive_indicator(self):
        ranked = ranking(TOP10)
        for relevant in ({"a"}, {"e", "z"}, {"z"}, {"j"}):
            for k in (1, 3, 10):
                assert accuracy_at_k(ranked, relevant, k) == (
                    1.0 if mrr_at_k(ranked, relevant, k) > 0 else 0.0
                )


class TestTokenPrf:
    def test_contained_answer_half_recall(self):
        pred = "to support the solar panels"
        gold = "to support the solar panels stack namely 910mm by 500mm"
        p, r, f1 = token_prf(pred, [gold])
        assert p == 1.0
        assert r == 0.5
        assert f1 == pytest.approx(2.0 / 3.0, abs=1e-4)

    def test_identity(self):
        assert token_prf("isolated torque levels", ["isolated torque levels"]) == (
            1.0,
            1.0,
            1.0,
        )

    def test_normalization(self):
        assert token_prf("ariane 5", ["Ariane 5."]) == (1.0, 1.0, 1.0)

    def test_empty_prediction_cases(self):
        assert token_prf("", ["an answer"]) == (0.0, 0.0, 0.0)
        assert token_prf("", [""]) == (1.0, 1.0, 1.0)
        assert token_prf("an answer", [""]) == (0.0, 0.0, 0.0)

    def test_multiset_counts_repeats(self):
        p, r, f1 = token_prf("a a b", ["a b b"])
        assert p == pytest.approx(2 / 3)
        assert r == pytest.approx(2 / 3)
        assert f1 == pytest.approx(2 / 3)

    def test_best_gold_wins(self):
        triple = token_prf("panel margin", ["unrelated", "panel margin"])
        assert triple == (1.0, 1.0, 1.0)

    def test_adding_gold_never_lowers_f1(self):
        pred = "torque levels"
        f1_one = token_prf(pred, ["torque levels high"])[2]
        f1_two = token_prf(pred, ["torque levels high", "torque levels"])[2]
        assert f1_two >= f1_one

    words = st.lists(st.sampled_from("alpha beta gamma delta".split()), max_size=6)

    @given(words, words)
    def test_swap_swaps_precision_recall(self, a, b):
        pred, gold = " ".join(a), " ".join(b)
        p1, r1, f1 = token_prf(pred, [gold])
        p2, r2, f2 = token_prf(gold, [pred])
        assert p1 == pytest.approx(r2)
        assert r1 == pytest.approx(p2)
        assert f1 == pytest.approx(f2)


def _gold(qid, question, answers, relevant):
    return GoldQuestion(
        question_id=qid,
        question=question,
        gold_answers=tuple(answers),
        relevant_passage_ids=frozenset(relevant),
    )


class TestEvaluateRetriever:
    def search_fn(self, question, k):
        table = {
            "q-one": ["p1", "p2", "p3"],
            "q-two": ["p9", "p2"],
        }
        return ranking(table[question])[:k]

    GOLD = [
        _gold("q-one", "q-one", ["x"], {"p1", "p5"}),  # recall .5, mrr 1, acc 1
        _gold("q-two", "q-two", ["x"], {"p2"}),  # recall 1, mrr .5, acc 1
    ]

    def test_macro_averages_hand_computed(self):
        report = evaluate_retriever(self.search_fn, self.GOLD, k=10)
        assert report.n_questions == 2
        assert report.recall_at_k == pytest.approx(0.75)
        assert report.mrr_at_k == pytest.approx(0.75)
        assert report.accuracy == pytest.approx(1.0)

    def test_single_question_perfect(self):
        gold = [_gold("q-one", "q-one", ["x"], {"p1"})]
        report = evaluate_retriever(self.search_fn, gold, k=10)
        assert (report.recall_at_k, report.mrr_at_k, report.accuracy) == (1, 1, 1)

    def test_duplicating_questions_leaves_averages_unchanged(self):
        doubled = [
            _gold(f"{g.question_id}-{i}", g.question, g.gold_answers, g.relevant_passage_ids)
            for g in self.GOLD
            for i in (0, 1)
        ]
        base = evaluate_retriever(self.search_fn, self.GOLD, k=10)
        dup = evaluate_retriever(self.search_fn, doubled, k=10)
        assert dup.recall_at_k == pytest.approx(base.recall_at_k)
        assert dup.mrr_at_k == pytest.approx(base.mrr_at_k)
        assert dup.accuracy == pytest.approx(base.accuracy)

    def test_unknown_gold_ids_rejected_with_listing(self):
        with pytest.raises(ValidationError, match="p5"):
            evaluate_retriever(
                self.search_fn, self.GOLD, k=10, known_ids={"p1", "p2", "p9"}
            )

    def test_empty_gold_rejected(self):
        with pytest.raises(ValidationError):
            evaluate_retriever(self.search_fn, [], k=10)

    def test_report_values_in_unit_interval(self):
        report = evaluate_retriever(self.search_fn, self.GOLD, k=10)
        for value in (report.recall_at_k, report.mrr_at_k, report.accuracy):
            assert 0.0 <= value <= 1.0


class TestEvaluateReader:
    GOLD = [
        _gold("q1", "q1", ["torque levels"], {"p1"}),
        _gold("q2", "q2", ["panel margin wide"], {"p2"}),
    ]

    def pipeline(self, gold_q, k):
        return {"q1": "torque levels", "q2": ""}[gold_q.question_id]

    def test_macro_average(self):
        report = evaluate_reader(self.pipeline, self.GOLD, k=10)
        # q1 exact match (1,1,1); q2 empty vs non-empty (0,0,0)
        assert report.precision == pytest.approx(0.5)
        assert report.recall == pytest.approx(0.5)
        assert report.f1 == pytest.approx(0.5)
        assert report.per_question[0]["question_id"] == "q1"

    def test_f1_zero_when_pr_zero(self):
        report = evaluate_reader(lambda g, k: "zzz", self.GOLD, k=10)
        assert report.f1 == 0.0


class TestGoldIO:
    def test_roundtrip(self, tmp_path):
        gold = [
            _gold("q1", "what margin?", ["wide"], {"p1", "p2"}),
            GoldQuestion("q2", "scoped?", ("yes",), frozenset({"p3"}), doc_id="d1"),
        ]
        path = tmp_path / "gold.jsonl"
        save_gold(gold, path)
        loaded = load_gold(path)
        assert loaded == gold

    def test_invariants_enforced(self):
        with pytest.raises(ValidationError):
            _gold("q", "q", [], {"p"})
        with pytest.raises(ValidationError):
            _gold("q", "q", ["a"], set())


class TestTables:
    def test_retriever_table_alignment(self):
        report = evaluate_retriever(
            TestEvaluateRetriever().search_fn, TestEvaluateRetriever.GOLD, k=10
        )
        table = render_retriever_table([("bm25", report), ("tfidf", report)])
        lines = table.splitlines()
        assert len(lines) == 3
        assert "R@10" in lines[0] and "MRR@10" in lines[0] and "Accuracy" in lines[0]
        assert "0.750" in lines[1]

    def test_reader_table(self):
        report = evaluate_reader(
            TestEvaluateReader().pipeline, TestEvaluateReader.GOLD, k=10
        )
        table = render_reader_table([("scripted/e2e", report)])
        assert "Precision" in table
        assert "0.500" in table

"""Ranking metrics against independent direct-definition oracles."""

import math

import numpy as np
import pytest

from ssmrank.errors import ContractError, ValidationError
from ssmrank.retrieval import (
    Qrels,
    RankedList,
    mrr_at_k,
    ndcg_at_k,
    recall_at_k,
)


def run_from_ids(query_id, doc_ids, scale=1.0):
    scored = [(d, scale * (len(doc_ids) - i)) for i, d in enumerate(doc_ids)]
    return RankedList.from_scored(query_id, scored)


def oracle_mrr(order, grades, k):
    for i, doc in enumerate(order[:k]):
        if grades.get(doc, 0) >= 1:
            return 1.0 / (i + 1)
    return 0.0


def oracle_ndcg(order, grades, k):
    dcg = sum(
        (2 ** grades.get(doc, 0) - 1) / math.log2(i + 2)
        for i, doc in enumerate(order[:k])
    )
    ideal = sorted(grades.values(), reverse=True)[:k]
    idcg = sum((2 ** g - 1) / math.log2(i + 2) for i, g in enumerate(ideal))
    return dcg / idcg if idcg > 0 else 0.0


def oracle_recall(order, grades, k):
    relevant = {d for d, g in grades.items() if g >= 1}
    if not relevant:
        return 0.0
    return len(relevant & set(order[:k])) / len(relevant)


class TestTrivialCases:
    def test_relevant_at_rank_one(self):
        qrels = Qrels()
        qrels.add("q", "d1", 1)
        runs = {"q": run_from_ids("q", ["d1", "d2"])}
        assert mrr_at_k(runs, qrels, 10) == 1.0

    def test_relevant_beyond_cutoff_scores_zero(self):
        qrels = Qrels()
        qrels.add("q", "d9", 1)
        runs = {"q": run_from_ids("q", [f"d{i}" for i in range(10)])}
        assert mrr_at_k(runs, qrels, 9) == 0.0

    def test_perfect_ordering_ndcg_one(self):
        qrels = Qrels()
        for doc, grade in (("a", 3), ("b", 2), ("c", 1)):
            qrels.add("q", doc, grade)
        runs = {"q": run_from_ids("q", ["a", "b", "c", "x"])}
        assert ndcg_at_k(runs, qrels, 4) == pytest.approx(1.0, abs=1e-12)

    def test_no_relevant_retrieved_ndcg_zero(self):
        qrels = Qrels()
        qrels.add("q", "missing", 2)
        runs = {"q": run_from_ids("q", ["a", "b"])}
        assert ndcg_at_k(runs, qrels, 2) == 0.0

    def test_graded_hand_case(self):
        # grades (2, 0, 1) at ranks 1..3: DCG = 3 + 0 + 0.5 = 3.5,
        # IDCG = 3 + 1/log2(3) ~ 3.6309, NDCG ~ 0.96394
        qrels = Qrels()
        qrels.add("q", "a", 2)
        qrels.add("q", "b", 0)
        qrels.add("q", "c", 1)
        runs = {"q": run_from_ids("q", ["a", "b", "c"])}
        expected = 3.5 / (3.0 + 1.0 / math.log2(3.0))
        got = ndcg_at_k(runs, qrels, 3)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.9639, abs=5e-5)

    def test_negative_grade_rejected(self):
        qrels = Qrels()
        with pytest.raises(ValidationError):
            qrels.add("q", "d", -1)

    def test_cutoff_validated(self):
        with pytest.raises(ContractError):
            mrr_at_k({}, Qrels(), 0)


class TestEvalPolicy:
    def test_qrels_only_query_counts_as_zero(self):
        qrels = Qrels()
        qrels.add("q1", "d1", 1)
        qrels.add("q2", "d2", 1)
        runs = {"q1": run_from_ids("q1", ["d1"])}
        assert mrr_at_k(runs, qrels, 10) == pytest.approx(0.5)

    def test_run_only_query_skipped_with_warning(self):
        qrels = Qrels()
        qrels.add("q1", "d1", 1)
        runs = {
            "q1": run_from_ids("q1", ["d1"]),
            "q9": run_from_ids("q9", ["d1"]),
        }
        with pytest.warns(UserWarning, match="run-only"):
            assert mrr_at_k(runs, qrels, 10) == 1.0


class TestOracleAgreement:
    def _random_case(self, rng):
        n_docs = int(rng.integers(3, 30))
        docs = [f"d{i}" for i in range(n_docs)]
        order = list(rng.permutation(docs))
        grades = {d: int(g) for d, g in zip(docs, rng.integers(0, 4, size=n_docs))}
        return order, grades

    def test_many_random_runs_match_all_oracles(self):
        rng = np.random.default_rng(11)
        for trial in range(100):
            order, grades = self._random_case(rng)
            k = int(rng.integers(1, len(order) + 3))
            qrels = Qrels()
            for d, g in grades.items():
                qrels.add("q", d, g)
            runs = {"q": run_from_ids("q", order)}
            assert mrr_at_k(runs, qrels, k) == pytest.approx(
                oracle_mrr(order, grades, k), abs=1e-12
            )
            assert ndcg_at_k(runs, qrels, k) == pytest.approx(
                oracle_ndcg(order, grades, k), abs=1e-12
            )
            assert recall_at_k(runs, qrels, k) == pytest.approx(
                oracle_recall(order, grades, k), abs=1e-12
            )


class TestMetricProperties:
    def test_swapping_relevant_above_nonrelevant_never_hurts(self):
        rng = np.random.default_rng(12)
        checked = 0
        for _ in range(60):
            order, grades = TestOracleAgreement()._random_case(rng)
            qrels = Qrels()
            for d, g in grades.items():
                qrels.add("q", d, g)
            # a relevant doc sitting directly below a non-relevant one
            pos = next(
                (i for i in range(1, len(order))
                 if grades[order[i]] >= 1 and grades[order[i - 1]] == 0),
                None,
            )
            if pos is None:
                continue
            checked += 1
            swapped = list(order)
            swapped[pos - 1], swapped[pos] = swapped[pos], swapped[pos - 1]
            for metric in (mrr_at_k, ndcg_at_k):
                before = metric({"q": run_from_ids("q", order)}, qrels, 10)
                after = metric({"q": run_from_ids("q", swapped)}, qrels, 10)
                assert after >= before - 1e-12
        assert checked >= 10

    def test_rank_only_dependence(self):
        qrels = Qrels()
        qrels.add("q", "d2", 2)
        order = ["d1", "d2", "d3"]
        for metric in (mrr_at_k, ndcg_at_k, recall_at_k):
            plain = metric({"q": run_from_ids("q", order, scale=1.0)}, qrels, 3)
            scaled = metric({"q": run_from_ids("q", order, scale=37.5)}, qrels, 3)
            assert plain == scaled

    def test_monotone_in_k_and_bounded(self):
        rng = np.random.default_rng(13)
        order, grades = TestOracleAgreement()._random_case(rng)
        qrels = Qrels()
        for d, g in grades.items():
            qrels.add("q", d, g)
        runs = {"q": run_from_ids("q", order)}
        prev_mrr, prev_recall = 0.0, 0.0
        for k in range(1, len(order) + 2):
            m = mrr_at_k(runs, qrels, k)
            r = recall_at_k(runs, qrels, k)
            n = ndcg_at_k(runs, qrels, k)
            assert 0.0 <= m <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= n <= 1.0
            assert m >= prev_mrr - 1e-15
            assert r >= prev_recall - 1e-15
            prev_mrr, prev_recall = m, r

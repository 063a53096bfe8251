"""Inverted index statistics and Okapi BM25 scoring against brute force."""

import math

import numpy as np
import pytest

from ssmrank.errors import ContractError, InputError
from ssmrank.retrieval import (
    bm25_search,
    build_index,
    load_index,
    save_index,
    tokenize,
)

WORDS = [
    "apple", "bridge", "copper", "delta", "ember", "falcon", "grain",
    "harbor", "iris", "jade", "kelp", "lantern", "meadow", "north",
]


def random_corpus(rng, n_docs=100):
    corpus = {}
    for i in range(n_docs):
        length = int(rng.integers(0, 20))
        corpus[f"d{i:03d}"] = " ".join(rng.choice(WORDS, size=length))
    # ensure at least one non-empty doc so the index is meaningful
    corpus["d000"] = "apple bridge apple"
    return corpus


class TestBuildIndex:
    def test_single_doc_stats(self):
        idx = build_index({"d1": "a b a"})
        assert dict(idx.postings["a"]) == {"d1": 2}
        assert dict(idx.postings["b"]) == {"d1": 1}
        assert idx.avg_doc_len == 3.0
        assert idx.num_docs == 1

    def test_empty_document_contributes_zero_length(self):
        idx = build_index({"d1": "x y", "d2": ""})
        assert idx.doc_lengths["d2"] == 0
        assert idx.avg_doc_len == 1.0

    def test_tokenization_rule(self):
        assert tokenize("Hello, WORLD-42!  foo_bar") == ["hello", "world", "42", "foo", "bar"]

    def test_duplicate_doc_id_rejected(self):
        with pytest.raises(InputError, match="duplicate"):
            build_index([("d1", "a"), ("d1", "b")])

    def test_empty_corpus_rejected(self):
        with pytest.raises(InputError):
            build_index({})

    def test_stats_match_brute_force_recount(self):
        rng = np.random.default_rng(5)
        corpus = random_corpus(rng)
        idx = build_index(corpus)
        # recount from scratch, independent of the index builder
        lengths = {}
        tf = {}
        for doc_id, text in corpus.items():
            terms = tokenize(text)
            lengths[doc_id] = len(terms)
            for t in terms:
                tf.setdefault(t, {}).setdefault(doc_id, 0)
                tf[t][doc_id] += 1
        assert idx.doc_lengths == lengths
        assert idx.num_docs == len(corpus)
        assert idx.avg_doc_len == pytest.approx(sum(lengths.values()) / len(lengths))
        assert set(idx.postings) == set(tf)
        for term, plist in idx.postings.items():
            assert plist == sorted(tf[term].items())
            assert [d for d, _ in plist] == sorted(d for d, _ in plist)

    def test_snapshot_round_trip_preserves_search(self, tmp_path):
        rng = np.random.default_rng(6)
        corpus = random_corpus(rng)
        idx = build_index(corpus)
        path = str(tmp_path / "index.json")
        save_index(path, idx)
        loaded = load_index(path)
        for query in ("apple bridge", "kelp", "north delta ember"):
            a = bm25_search(idx, query, k=20, query_id="q")
            b = bm25_search(loaded, query, k=20, query_id="q")
            assert a == b


def brute_force_bm25(corpus, query, k1=0.9, b=0.4):
    """Direct per-document application of the scoring formula."""
    doc_terms = {d: tokenize(t) for d, t in corpus.items()}
    n_docs = len(corpus)
    avg = sum(len(t) for t in doc_terms.values()) / n_docs
    scores = {}
    for doc_id, terms in doc_terms.items():
        total = 0.0
        for q_term in tokenize(query):
            tf = terms.count(q_term)
            if tf == 0:
                continue
            df = sum(1 for t in doc_terms.values() if q_term in t)
            idf_val = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
            total += idf_val * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(terms) / avg))
        if total != 0.0:
            scores[doc_id] = total
    return scores


class TestBm25:
    def test_absent_term_contributes_nothing(self):
        idx = build_index({"d1": "apple", "d2": "bridge"})
        run = bm25_search(idx, "apple zzz", k=5, query_id="q")
        base = bm25_search(idx, "apple", k=5, query_id="q")
        assert [(e.doc_id, e.score) for e in run.entries] == [
            (e.doc_id, e.score) for e in base.entries
        ]

    def test_single_doc_corpus_ranks_it_first(self):
        idx = build_index({"only": "apple pie"})
        run = bm25_search(idx, "apple", k=3, query_id="q")
        assert run.entries[0].doc_id == "only"
        assert run.entries[0].rank == 1

    def test_zero_match_query_gives_empty_list(self):
        idx = build_index({"d1": "apple"})
        run = bm25_search(idx, "zzz qqq", k=5, query_id="q")
        assert run.entries == ()

    def test_k_validated(self):
        idx = build_index({"d1": "apple"})
        with pytest.raises(ContractError):
            bm25_search(idx, "apple", k=0)

    def test_matches_brute_force_scorer(self):
        rng = np.random.default_rng(7)
        corpus = {f"d{i:02d}": " ".join(rng.choice(WORDS, size=int(rng.integers(1, 12))))
                  for i in range(20)}
        idx = build_index(corpus)
        queries = ["apple bridge", "delta", "kelp north iris", "apple apple", "ember falcon grain"]
        for query in queries:
            expected = brute_force_bm25(corpus, query)
            run = bm25_search(idx, query, k=len(corpus), query_id="q")
            got = {e.doc_id: e.score for e in run.entries}
            assert set(got) == set(expected)
            for doc_id in expected:
                assert got[doc_id] == pytest.approx(expected[doc_id], abs=1e-9)

    def test_full_k_returns_each_matching_doc_once(self):
        rng = np.random.default_rng(8)
        corpus = random_corpus(rng)
        idx = build_index(corpus)
        run = bm25_search(idx, "apple harbor", k=len(corpus), query_id="q")
        ids = run.doc_ids()
        assert len(ids) == len(set(ids))
        matching = {d for d, t in corpus.items() if {"apple", "harbor"} & set(tokenize(t))}
        assert set(ids) == matching
        assert all(e.score > 0 for e in run.entries)

    def test_ties_break_by_ascending_doc_id(self):
        idx = build_index({"b": "apple", "a": "apple", "c": "apple"})
        run = bm25_search(idx, "apple", k=3, query_id="q")
        assert run.doc_ids() == ["a", "b", "c"]

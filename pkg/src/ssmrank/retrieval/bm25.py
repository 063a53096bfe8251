"""Okapi BM25 scoring over the inverted index.

score(q, d) = sum over query-term occurrences of
    IDF(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avglen))
with IDF(t) = ln(1 + (N - df + 0.5) / (df + 0.5)) and defaults k1=0.9, b=0.4.
Ties break by ascending doc id; only matching (nonzero-score) docs appear.
"""

from __future__ import annotations

import math

from ..errors import ContractError
from .index import InvertedIndex, tokenize
from .trec import RankEntry, RankedList

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4


def idf(index: InvertedIndex, term: str) -> float:
    df = index.doc_freq(term)
    if df == 0:
        return 0.0
    return math.log(1.0 + (index.num_docs - df + 0.5) / (df + 0.5))


def bm25_search(
    index: InvertedIndex,
    query: str,
    k: int,
    query_id: str = "",
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> RankedList:
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    avg_len = index.avg_doc_len
    scores: dict[str, float] = {}
    for term in tokenize(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        term_idf = idf(index, term)
        for doc_id, tf in plist:
            norm = k1 * (1.0 - b + b * index.doc_lengths[doc_id] / avg_len)
            scores[doc_id] = scores.get(doc_id, 0.0) + term_idf * tf * (k1 + 1.0) / (tf + norm)
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    entries = tuple(
        RankEntry(doc_id=doc_id, score=score, rank=i + 1)
        for i, (doc_id, score) in enumerate(ordered)
    )
    return RankedList(query_id=query_id, entries=entries)

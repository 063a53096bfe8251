"""Rank-cutoff metrics over run/qrels pairs: MRR@k, NDCG@k, Recall@k.

Evaluation policy: every query present in the judgments counts toward the
mean (queries missing from the run contribute 0); queries that appear only
in the run are skipped with a warning. Metrics read ranks, never raw scores.
"""

from __future__ import annotations

import math
import warnings

from ..errors import ContractError
from .trec import Qrels, RankedList


def _check_k(k: int) -> None:
    if k < 1:
        raise ContractError(f"metric cutoff must be >= 1, got {k}")


def _warn_run_only(runs: dict[str, RankedList], qrels: Qrels) -> None:
    extra = sorted(set(runs) - set(qrels.query_ids()))
    if extra:
        warnings.warn(f"skipping {len(extra)} run-only queries: {extra[:5]}", stacklevel=3)


def mrr_at_k(runs: dict[str, RankedList], qrels: Qrels, k: int) -> float:
    """Mean reciprocal rank of the first relevant doc within the top k."""
    _check_k(k)
    _warn_run_only(runs, qrels)
    query_ids = qrels.query_ids()
    if not query_ids:
        return 0.0
    total = 0.0
    for query_id in query_ids:
        run = runs.get(query_id)
        if run is None:
            continue
        for entry in run.entries[:k]:
            if qrels.grade(query_id, entry.doc_id) >= 1:
                total += 1.0 / entry.rank
                break
    return total / len(query_ids)


def ndcg_at_k(runs: dict[str, RankedList], qrels: Qrels, k: int) -> float:
    """Normalized discounted cumulative gain with exponential gains 2^rel - 1;
    0 for queries whose ideal gain is 0."""
    _check_k(k)
    _warn_run_only(runs, qrels)
    query_ids = qrels.query_ids()
    if not query_ids:
        return 0.0
    total = 0.0
    for query_id in query_ids:
        grades = qrels.judged(query_id)
        ideal = sorted(grades.values(), reverse=True)[:k]
        idcg = sum((2.0 ** g - 1.0) / math.log2(i + 2) for i, g in enumerate(ideal))
        if idcg == 0.0:
            continue
        run = runs.get(query_id)
        if run is None:
            continue
        dcg = sum(
            (2.0 ** qrels.grade(query_id, e.doc_id) - 1.0) / math.log2(e.rank + 1)
            for e in run.entries[:k]
        )
        total += dcg / idcg
    return total / len(query_ids)


def recall_at_k(runs: dict[str, RankedList], qrels: Qrels, k: int) -> float:
    """Fraction of each query's relevant docs retrieved within the top k."""
    _check_k(k)
    _warn_run_only(runs, qrels)
    query_ids = qrels.query_ids()
    if not query_ids:
        return 0.0
    total = 0.0
    for query_id in query_ids:
        relevant = {d for d, g in qrels.judged(query_id).items() if g >= 1}
        if not relevant:
            continue
        run = runs.get(query_id)
        if run is None:
            continue
        hit = sum(1 for e in run.entries[:k] if e.doc_id in relevant)
        total += hit / len(relevant)
    return total / len(query_ids)

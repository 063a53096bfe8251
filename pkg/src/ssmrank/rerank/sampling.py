"""Hard-negative sampling from a first-stage ranked list.

Negatives are drawn uniformly without replacement from the candidates not
marked relevant in the judgments, via a seeded Fisher-Yates shuffle, so a
fixed seed fully determines the sample.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnderSupplyError
from ..retrieval.trec import Qrels, RankedList


def fisher_yates(items: list, rng: np.random.Generator) -> list:
    """Classic in-place shuffle driven by rng.integers(0, i + 1)."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        out[i], out[j] = out[j], out[i]
    return out


def sample_negatives(
    ranklist: RankedList, qrels: Qrels, m: int, seed: int
) -> list[str]:
    """m hard-negative doc ids for ``ranklist.query_id``."""
    eligible = [
        e.doc_id
        for e in ranklist.entries
        if qrels.grade(ranklist.query_id, e.doc_id) < 1
    ]
    if len(eligible) < m:
        raise UnderSupplyError(
            f"query {ranklist.query_id}: {len(eligible)} eligible negatives, need {m}"
        )
    shuffled = fisher_yates(eligible, np.random.default_rng(seed))
    return shuffled[:m]

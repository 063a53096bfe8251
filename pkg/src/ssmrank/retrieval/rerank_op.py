"""Second-stage reranking: rescore the top candidates with the cross-encoder
scorer, keep the tail in first-stage order below the rescored block."""

from __future__ import annotations

from ..errors import ContractError, DataError
from ..model.network import RerankModel
from ..rerank.template import TruncationPolicy, format_input
from ..rerank.tokenizer import ByteTokenizer
from .trec import RankEntry, RankedList


def rerank(
    model: RerankModel,
    query: str,
    candidates: RankedList,
    threshold: int,
    corpus: dict[str, str],
    policy: TruncationPolicy | None = None,
    tokenizer: ByteTokenizer | None = None,
) -> RankedList:
    """Rescore the top-``threshold`` candidates; ties break by ascending doc
    id; the unrescored tail keeps its order with scores offset below the
    rescored minimum."""
    if threshold > len(candidates.entries):
        raise ContractError(
            f"threshold {threshold} exceeds candidate count {len(candidates.entries)}"
        )
    if threshold == 0:
        return candidates
    policy = policy or TruncationPolicy.first_p()
    tokenizer = tokenizer or ByteTokenizer()

    head = candidates.entries[:threshold]
    tail = candidates.entries[threshold:]
    rescored: list[tuple[str, float]] = []
    for entry in head:
        text = corpus.get(entry.doc_id)
        if text is None:
            raise DataError(f"missing document text for candidate {entry.doc_id}")
        ids = format_input(query, text, policy, tokenizer)
        rescored.append((entry.doc_id, model.score(ids)))
    rescored.sort(key=lambda pair: (-pair[1], pair[0]))

    entries = [
        RankEntry(doc_id=doc_id, score=score, rank=i + 1)
        for i, (doc_id, score) in enumerate(rescored)
    ]
    if tail:
        floor = min(score for _, score in rescored)
        for j, entry in enumerate(tail):
            entries.append(
                RankEntry(doc_id=entry.doc_id, score=floor - (j + 1), rank=threshold + j + 1)
            )
    return RankedList(query_id=candidates.query_id, entries=tuple(entries))

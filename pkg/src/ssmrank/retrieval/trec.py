"""Ranked lists, relevance judgments, and their TREC text formats.

Run lines are ``query_id Q0 doc_id rank score run_tag`` with scores printed to
6 decimal places; qrels lines are ``query_id 0 doc_id relevance``. These two
files are the exchange format between the retriever, the reranker, and the
evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError, ValidationError


@dataclass(frozen=True)
class RankEntry:
    doc_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    """Ordered retrieval result for one query.

    Scores are non-increasing, ranks contiguous from 1, doc ids unique.
    """

    query_id: str
    entries: tuple[RankEntry, ...]

    def __post_init__(self):
        seen = set()
        prev_score = None
        for i, entry in enumerate(self.entries):
            if entry.rank != i + 1:
                raise ValidationError(
                    f"query {self.query_id}: rank {entry.rank} at position {i}"
                )
            if prev_score is not None and entry.score > prev_score:
                raise ValidationError(
                    f"query {self.query_id}: scores increase at rank {entry.rank}"
                )
            if entry.doc_id in seen:
                raise ValidationError(
                    f"query {self.query_id}: duplicate doc id {entry.doc_id}"
                )
            seen.add(entry.doc_id)
            prev_score = entry.score

    @classmethod
    def from_scored(cls, query_id: str, scored: list[tuple[str, float]]) -> "RankedList":
        """Build from (doc_id, score) pairs, sorting by descending score with
        ascending doc_id as the deterministic tie-break."""
        ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0]))
        entries = tuple(
            RankEntry(doc_id=d, score=s, rank=i + 1) for i, (d, s) in enumerate(ordered)
        )
        return cls(query_id=query_id, entries=entries)

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]


class Qrels:
    """Graded relevance judgments: (query_id, doc_id) -> integer grade >= 0."""

    def __init__(self):
        self._grades: dict[str, dict[str, int]] = {}

    def add(self, query_id: str, doc_id: str, grade: int) -> None:
        if grade < 0:
            raise ValidationError(f"negative relevance grade for {query_id}/{doc_id}")
        per_query = self._grades.setdefault(query_id, {})
        if doc_id in per_query:
            raise ValidationError(f"duplicate qrels pair {query_id}/{doc_id}")
        per_query[doc_id] = grade

    def grade(self, query_id: str, doc_id: str) -> int:
        return self._grades.get(query_id, {}).get(doc_id, 0)

    def judged(self, query_id: str) -> dict[str, int]:
        return dict(self._grades.get(query_id, {}))

    def query_ids(self) -> list[str]:
        return sorted(self._grades)

    def __contains__(self, query_id: str) -> bool:
        return query_id in self._grades


def write_run(path: str, runs: dict[str, RankedList], tag: str = "ssmrank") -> None:
    """Write ranked lists in query-id order; scores printed to 6 decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        for query_id in sorted(runs):
            for entry in runs[query_id].entries:
                fh.write(
                    f"{query_id} Q0 {entry.doc_id} {entry.rank} {entry.score:.6f} {tag}\n"
                )


def read_run(path: str) -> dict[str, RankedList]:
    per_query: dict[str, list[tuple[int, str, float]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6 or parts[1] != "Q0":
                raise ParseError("malformed run line", path=path, line_no=line_no)
            query_id, _, doc_id, rank_s, score_s, _tag = parts
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError as exc:
                raise ParseError(f"bad rank/score: {exc}", path=path, line_no=line_no)
            per_query.setdefault(query_id, []).append((rank, doc_id, score))
    runs: dict[str, RankedList] = {}
    for query_id, rows in per_query.items():
        rows.sort(key=lambda r: r[0])
        entries = tuple(
            RankEntry(doc_id=doc_id, score=score, rank=i + 1)
            for i, (_, doc_id, score) in enumerate(rows)
        )
        runs[query_id] = RankedList(query_id=query_id, entries=entries)
    return runs


def write_qrels(path: str, qrels: Qrels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for query_id in qrels.query_ids():
            for doc_id, grade in sorted(qrels.judged(query_id).items()):
                fh.write(f"{query_id} 0 {doc_id} {grade}\n")


def read_qrels(path: str) -> Qrels:
    qrels = Qrels()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError("malformed qrels line", path=path, line_no=line_no)
            query_id, _, doc_id, grade_s = parts
            try:
                grade = int(grade_s)
            except ValueError as exc:
                raise ParseError(f"bad relevance grade: {exc}", path=path, line_no=line_no)
            try:
                qrels.add(query_id, doc_id, grade)
            except ValidationError as exc:
                raise ParseError(str(exc), path=path, line_no=line_no)
    return qrels

"""Scoring-input assembly: template bytes, length truncation, end marker.

The scorer input is the byte string ``document: {d} ; query: {q} ; `` followed
by the EOS id. Truncation to a length budget removes document bytes first and
query bytes second, keeping the short query intact for as long as possible;
the EOS id is always present and always last.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InputError, ValidationError
from .tokenizer import ByteTokenizer

_PREFIX = b"document: "
_MID = b" ; query: "
_TAIL = b" ; "

FIRSTP_LIMIT = 512
LONGP_LIMIT = 1536


@dataclass(frozen=True)
class TruncationPolicy:
    """Token budget for scorer inputs (end marker included)."""

    limit: int

    def __post_init__(self):
        if self.limit < 8:
            raise ValidationError(f"truncation limit must be >= 8, got {self.limit}")

    @classmethod
    def first_p(cls) -> "TruncationPolicy":
        return cls(FIRSTP_LIMIT)

    @classmethod
    def long_p(cls) -> "TruncationPolicy":
        return cls(LONGP_LIMIT)

    @classmethod
    def custom(cls, limit: int) -> "TruncationPolicy":
        return cls(limit)


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


def format_input(
    query: str,
    doc: str,
    policy: TruncationPolicy,
    tokenizer: ByteTokenizer | None = None,
) -> list[int]:
    """Token ids for one (query, document) scoring input."""
    tokenizer = tokenizer or ByteTokenizer()
    query = normalize_ws(query)
    doc = normalize_ws(doc)
    if not query:
        raise InputError("query is empty after whitespace normalization")
    if not doc:
        raise InputError("document is empty after whitespace normalization")
    q_bytes = query.encode("utf-8")
    d_bytes = doc.encode("utf-8")
    budget = policy.limit - 1  # reserve the end marker
    template_len = len(_PREFIX) + len(_MID) + len(_TAIL)
    overflow = template_len + len(d_bytes) + len(q_bytes) - budget
    if overflow > 0:
        cut = min(overflow, len(d_bytes))
        d_bytes = d_bytes[: len(d_bytes) - cut]
        overflow -= cut
    if overflow > 0:
        cut = min(overflow, len(q_bytes))
        q_bytes = q_bytes[: len(q_bytes) - cut]
        overflow -= cut
    assembled = _PREFIX + d_bytes + _MID + q_bytes + _TAIL
    if overflow > 0:  # budget smaller than the bare template
        assembled = assembled[:budget]
    ids = tokenizer.encode_bytes(assembled)
    ids.append(tokenizer.eos_id)
    return ids

"""In-memory inverted index with exact collection statistics.

Tokenization is lowercase + split on non-alphanumeric. The on-disk snapshot
is versioned JSON; loading reproduces identical search results.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import InputError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

FORMAT_VERSION = 1


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class InvertedIndex:
    postings: dict[str, list[tuple[str, int]]]  # term -> [(doc_id, tf)], by doc_id
    doc_lengths: dict[str, int]

    @property
    def num_docs(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_doc_len(self) -> float:
        if not self.doc_lengths:
            return 0.0
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def doc_freq(self, term: str) -> int:
        return len(self.postings.get(term, ()))


def build_index(corpus) -> InvertedIndex:
    """Index a corpus given as {doc_id: text} or iterable of (doc_id, text)."""
    pairs = corpus.items() if isinstance(corpus, dict) else corpus
    postings: dict[str, dict[str, int]] = {}
    doc_lengths: dict[str, int] = {}
    for doc_id, text in pairs:
        if doc_id in doc_lengths:
            raise InputError(f"duplicate doc id {doc_id!r} during indexing")
        terms = tokenize(text)
        doc_lengths[doc_id] = len(terms)
        for term in terms:
            per_term = postings.setdefault(term, {})
            per_term[doc_id] = per_term.get(doc_id, 0) + 1
    if not doc_lengths:
        raise InputError("cannot index an empty corpus")
    sorted_postings = {
        term: sorted(freqs.items()) for term, freqs in sorted(postings.items())
    }
    return InvertedIndex(postings=sorted_postings, doc_lengths=doc_lengths)


def save_index(path: str, index: InvertedIndex) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "doc_lengths": index.doc_lengths,
        "postings": {t: [[d, f] for d, f in plist] for t, plist in index.postings.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_index(path: str) -> InvertedIndex:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read index snapshot {path}: {exc}") from exc
    if payload.get("format_version") != FORMAT_VERSION:
        raise InputError(f"unsupported index format {payload.get('format_version')!r}")
    postings = {
        term: [(doc_id, int(tf)) for doc_id, tf in plist]
        for term, plist in payload["postings"].items()
    }
    return InvertedIndex(postings=postings, doc_lengths={
        k: int(v) for k, v in payload["doc_lengths"].items()
    })

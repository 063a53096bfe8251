from .bm25 import bm25_search, idf
from .index import InvertedIndex, build_index, load_index, save_index, tokenize
from .metrics import mrr_at_k, ndcg_at_k, recall_at_k
from .rerank_op import rerank
from .trec import (
    Qrels,
    RankEntry,
    RankedList,
    read_qrels,
    read_run,
    write_qrels,
    write_run,
)

__all__ = [
    "InvertedIndex",
    "Qrels",
    "RankEntry",
    "RankedList",
    "bm25_search",
    "build_index",
    "idf",
    "load_index",
    "mrr_at_k",
    "ndcg_at_k",
    "recall_at_k",
    "read_qrels",
    "read_run",
    "rerank",
    "save_index",
    "tokenize",
    "write_qrels",
    "write_run",
]

"""State-space-model cross-encoder reranking toolkit.

Subpackages:
    ssm        -- LTI and selective (time-varying) state-space layers
    model      -- stacked causal sequence models with exact reverse-mode gradients
    rerank     -- tokenization, input templates, contrastive training loop
    retrieval  -- BM25 first stage, ranking metrics, TREC run/qrels I/O
    bench      -- throughput/latency measurement, operator profiling, FLOP estimates
"""

__version__ = "0.1.0"

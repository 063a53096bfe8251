"""Contrastive softmax loss over one positive and m sampled negatives.

loss = -log( exp(s+) / (exp(s+) + sum_j exp(s-_j)) ), evaluated through a
log-sum-exp shift; batches average per-instance losses.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import ContractError, NumericError
from ..model.autodiff import Tensor, concat, logsumexp, reshape, sub


def softmax_loss(score_pos: float, score_negs: Sequence[float]) -> float:
    """Scalar loss for one training instance."""
    if len(score_negs) < 1:
        raise ContractError("at least one negative score is required")
    scores = [float(score_pos)] + [float(s) for s in score_negs]
    if not all(math.isfinite(s) for s in scores):
        raise NumericError("non-finite relevance score in loss input")
    shift = max(scores)
    lse = shift + math.log(sum(math.exp(s - shift) for s in scores))
    return lse - float(score_pos)


def softmax_loss_tensor(score_pos: Tensor, score_negs: Sequence[Tensor]) -> Tensor:
    """Recorded-graph version used by the training loop; same value as
    :func:`softmax_loss` on the underlying floats."""
    if len(score_negs) < 1:
        raise ContractError("at least one negative score is required")
    parts = [reshape(score_pos, (1,))] + [reshape(s, (1,)) for s in score_negs]
    scores = concat(parts, axis=0)
    if not np.all(np.isfinite(scores.data)):
        raise NumericError("non-finite relevance score in loss input")
    lse = reshape(logsumexp(scores, axis=0), ())
    return sub(lse, reshape(score_pos, ()))

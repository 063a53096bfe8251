"""Operator-level timing: run forwards under the scope profiler and collect
the per-scope table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import profiling
from ..model.network import RerankModel


@dataclass
class ProfileResult:
    outputs: list[np.ndarray]
    registry: profiling.TimerRegistry | None

    def rows(self) -> list[tuple[int, str, int, float, float]]:
        return self.registry.rows() if self.registry is not None else []


def profile_operators(
    model: RerankModel,
    batch_ids: list[np.ndarray],
    enabled: bool = True,
    clock=None,
) -> ProfileResult:
    """Forward the batch; when enabled, every named compute scope
    (embedding, projection, local_conv, scan, chunk_matmul, attention,
    normalization, score_head) accumulates count and cumulative time.
    Profiling never touches the computed values."""
    if not enabled:
        outputs = [model.forward_tensor(ids).data for ids in batch_ids]
        return ProfileResult(outputs=outputs, registry=None)
    registry = profiling.TimerRegistry(clock=clock)
    with profiling.activate(registry):
        outputs = [model.forward_tensor(ids).data for ids in batch_ids]
    return ProfileResult(outputs=outputs, registry=registry)

"""Versioned checkpoint container: config plus named float64 parameter arrays.

Stored as an ``.npz`` archive; array bytes round-trip exactly, so a save/load
cycle is bit-identical on the float64 path.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..errors import InputError
from .config import ModelConfig
from .network import RerankModel
from .autodiff import Tensor

FORMAT_VERSION = 1


def save_checkpoint(path: str, model: RerankModel) -> None:
    meta = {"format_version": FORMAT_VERSION, "config": asdict(model.config)}
    arrays = {f"param/{name}": t.data for name, t in model.params.items()}
    np.savez(path, __meta__=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path: str) -> RerankModel:
    try:
        archive = np.load(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc}") from exc
    if "__meta__" not in archive:
        raise InputError(f"checkpoint {path} missing metadata record")
    meta = json.loads(bytes(archive["__meta__"]).decode())
    if meta.get("format_version") != FORMAT_VERSION:
        raise InputError(
            f"unsupported checkpoint format {meta.get('format_version')!r}"
        )
    config = ModelConfig(**meta["config"])
    params: dict[str, Tensor] = {}
    for key in archive.files:
        if key.startswith("param/"):
            params[key[len("param/"):]] = Tensor(archive[key])
    model = RerankModel(config, params=params)
    expected = set(RerankModel(config, seed=0).params)
    if set(params) != expected:
        missing = expected.symmetric_difference(params)
        raise InputError(f"checkpoint parameter names mismatch: {sorted(missing)}")
    return model

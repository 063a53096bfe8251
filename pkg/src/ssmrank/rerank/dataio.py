"""Text-file formats for the pipeline: corpus/queries TSV, training-instance
manifests, and the flat key=value run configuration."""

from __future__ import annotations

from ..errors import InputError, ParseError
from ..model.config import BLOCK_KINDS, ModelConfig
from .template import TruncationPolicy
from .trainer import TrainConfig


def _read_tsv(path: str, kind: str) -> dict[str, str]:
    records: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ParseError(f"{kind} line missing tab separator", path=path, line_no=line_no)
            rec_id, text = line.split("\t", 1)
            if rec_id in records:
                raise ParseError(f"duplicate {kind} id {rec_id}", path=path, line_no=line_no)
            records[rec_id] = text
    return records


def read_corpus(path: str) -> dict[str, str]:
    """doc_id<TAB>text, one record per line."""
    return _read_tsv(path, "doc")


def read_queries(path: str) -> dict[str, str]:
    """query_id<TAB>text, one record per line."""
    return _read_tsv(path, "query")


def write_tsv(path: str, records: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec_id, text in records.items():
            fh.write(f"{rec_id}\t{text}\n")


def read_manifest(path: str) -> list[tuple[str, str, list[str]]]:
    """Training-instance manifest: query_id<TAB>pos_doc_id<TAB>neg1,...,negm."""
    rows: list[tuple[str, str, list[str]]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not parts[2]:
                raise ParseError("malformed manifest line", path=path, line_no=line_no)
            query_id, pos_id, negs = parts
            rows.append((query_id, pos_id, negs.split(",")))
    return rows


def write_manifest(path: str, rows: list[tuple[str, str, list[str]]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for query_id, pos_id, negs in rows:
            fh.write(f"{query_id}\t{pos_id}\t{','.join(negs)}\n")


# flat key=value configuration ------------------------------------------------

_MODEL_KEYS = {
    "vocab_size": int,
    "d_model": int,
    "n_layers": int,
    "block_kind": str,
    "state_size": int,
    "head_dim": int,
    "n_heads": int,
    "expand_factor": int,
    "local_conv_width": int,
    "max_seq_len": int,
    "chunk_len": int,
    "ssd_impl": str,
    "eos_id": int,
    "pad_id": int,
}

_TRAIN_KEYS = {
    "learning_rate": float,
    "warmup_fraction": float,
    "epochs": int,
    "batch_size": int,
    "num_negatives": int,
    "seed": int,
    "weight_decay": float,
    "adam_beta1": float,
    "adam_beta2": float,
    "adam_eps": float,
    "max_steps": int,
}

_PIPELINE_KEYS = {
    "truncation": str,  # firstp | longp | integer limit
    "threshold": int,
}

ALLOWED_KEYS = {**_MODEL_KEYS, **_TRAIN_KEYS, **_PIPELINE_KEYS}


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' comments and blank lines allowed; unknown
    keys rejected."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ParseError("expected key=value", path=path, line_no=line_no)
            key, value = stripped.split("=", 1)
            key, value = key.strip(), value.strip()
            if key not in ALLOWED_KEYS:
                raise ParseError(f"unknown configuration key {key!r}", path=path, line_no=line_no)
            if key in values:
                raise ParseError(f"duplicate configuration key {key!r}", path=path, line_no=line_no)
            values[key] = value
    return values


def _convert(key: str, raw: str):
    caster = ALLOWED_KEYS[key]
    try:
        return caster(raw)
    except ValueError as exc:
        raise InputError(f"configuration key {key}={raw!r}: {exc}") from exc


def model_config_from_values(values: dict[str, str]) -> ModelConfig:
    kw = {k: _convert(k, v) for k, v in values.items() if k in _MODEL_KEYS}
    missing = {"vocab_size", "d_model", "n_layers", "block_kind"} - set(kw)
    if missing:
        raise InputError(f"configuration missing model keys: {sorted(missing)}")
    if kw["block_kind"] not in BLOCK_KINDS:
        raise InputError(f"unknown block_kind {kw['block_kind']!r}")
    return ModelConfig(**kw)


def train_config_from_values(values: dict[str, str]) -> TrainConfig:
    kw = {k: _convert(k, v) for k, v in values.items() if k in _TRAIN_KEYS}
    return TrainConfig(**kw)


def truncation_from_values(values: dict[str, str]) -> TruncationPolicy:
    raw = values.get("truncation", "firstp").lower()
    if raw == "firstp":
        return TruncationPolicy.first_p()
    if raw == "longp":
        return TruncationPolicy.long_p()
    try:
        return TruncationPolicy.custom(int(raw))
    except ValueError as exc:
        raise InputError(f"truncation must be firstp, longp, or an integer: {raw!r}") from exc


def threshold_from_values(values: dict[str, str], default: int = 100) -> int:
    return _convert("threshold", values["threshold"]) if "threshold" in values else default

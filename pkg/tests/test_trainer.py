"""Training loop: schedule arithmetic, determinism, loss descent, aborts."""

import math

import numpy as np
import pytest

from ssmrank.errors import NumericError, ParseError, ValidationError
from ssmrank.model import ModelConfig, RerankModel
from ssmrank.rerank import (
    ByteTokenizer,
    TrainConfig,
    TrainingInstance,
    TruncationPolicy,
    lr_at_step,
    train,
)
from ssmrank.rerank.dataio import (
    model_config_from_values,
    parse_config_file,
    read_manifest,
    train_config_from_values,
    truncation_from_values,
    write_manifest,
)


def tiny_model(seed=0, kind="mamba2"):
    config = ModelConfig(
        vocab_size=259,
        d_model=12,
        n_layers=1,
        block_kind=kind,
        state_size=4,
        head_dim=4,
        n_heads=2,
        max_seq_len=128,
        chunk_len=8,
    )
    return RerankModel(config, seed=seed)


def tiny_dataset():
    out = []
    for i in range(4):
        out.append(
            TrainingInstance(
                query_id=f"q{i}",
                query=f"term{i} find",
                positive_id=f"p{i}",
                positive=f"good term{i} match here",
                negative_ids=(f"n{i}a", f"n{i}b"),
                negatives=(f"unrelated filler {i}", f"other noise {i}"),
            )
        )
    return out


class TestSchedule:
    def test_peak_reached_exactly_at_warmup_boundary(self):
        total, frac, peak = 200, 0.1, 3e-3
        boundary = math.floor(frac * total)
        assert lr_at_step(boundary, total, frac, peak) == pytest.approx(peak, rel=1e-15)
        assert lr_at_step(boundary - 1, total, frac, peak) < peak

    def test_zero_at_final_step(self):
        assert lr_at_step(200, 200, 0.1, 3e-3) == 0.0

    def test_linear_on_both_sides(self):
        total, frac, peak = 100, 0.2, 1.0
        assert lr_at_step(10, total, frac, peak) == pytest.approx(0.5)
        assert lr_at_step(60, total, frac, peak) == pytest.approx(0.5)

    def test_zero_warmup_starts_at_peak(self):
        assert lr_at_step(1, 10, 0.0, 1.0) == pytest.approx(0.9)


class TestTrainLoop:
    def test_zero_learning_rate_leaves_params_unchanged(self):
        model = tiny_model(seed=1)
        before = {k: t.data.copy() for k, t in model.params.items()}
        config = TrainConfig(learning_rate=0.0, epochs=2, batch_size=2, num_negatives=2, seed=3)
        train(tiny_dataset(), config, model, TruncationPolicy.custom(64))
        for name, arr in before.items():
            assert np.array_equal(model.params[name].data, arr), name

    def test_deterministic_under_seed(self):
        results = []
        for _ in range(2):
            model = tiny_model(seed=2)
            config = TrainConfig(learning_rate=1e-3, epochs=2, batch_size=2, seed=11)
            res = train(tiny_dataset(), config, model, TruncationPolicy.custom(64))
            results.append((res.loss_curve, {k: t.data.copy() for k, t in model.params.items()}))
        assert results[0][0] == results[1][0]
        for name in results[0][1]:
            assert np.array_equal(results[0][1][name], results[1][1][name])

    def test_loss_descends_on_tiny_overfit(self):
        model = tiny_model(seed=3)
        config = TrainConfig(
            learning_rate=5e-3, epochs=30, batch_size=4, seed=5, warmup_fraction=0.1
        )
        res = train(tiny_dataset(), config, model, TruncationPolicy.custom(64))
        first = np.mean(res.loss_curve[:3])
        last = np.mean(res.loss_curve[-3:])
        assert last < first * 0.5
        assert res.steps == 30

    def test_divergence_aborts_with_step_index(self):
        model = tiny_model(seed=4)
        model.params["head.w"].data[:] = np.nan
        config = TrainConfig(learning_rate=1e-3, epochs=1, batch_size=2, seed=7)
        with pytest.raises(NumericError, match="step 1"):
            train(tiny_dataset(), config, model, TruncationPolicy.custom(64))

    def test_instance_invariants(self):
        with pytest.raises(ValidationError):
            TrainingInstance("q", "x", "p", "pos", ("p",), ("pos again",))
        with pytest.raises(ValidationError):
            TrainingInstance("q", "x", "p", "pos", (), ())

    def test_warmup_fraction_validated(self):
        with pytest.raises(ValidationError):
            TrainConfig(warmup_fraction=1.0)


class TestConfigFiles:
    def test_round_trip_and_types(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# comment\n"
            "vocab_size=259\nd_model=16\nn_layers=2\nblock_kind=mamba2\n"
            "learning_rate=0.003\nwarmup_fraction=0.1\nepochs=3\nbatch_size=4\n"
            "num_negatives=7\nseed=42\ntruncation=128\nthreshold=50\n"
        )
        values = parse_config_file(str(path))
        mc = model_config_from_values(values)
        tc = train_config_from_values(values)
        policy = truncation_from_values(values)
        assert mc.block_kind == "mamba2" and mc.d_model == 16
        assert tc.learning_rate == pytest.approx(3e-3) and tc.num_negatives == 7
        assert policy.limit == 128

    def test_unknown_key_rejected_with_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("d_model=8\nbogus_key=1\n")
        with pytest.raises(ParseError, match="bogus_key"):
            parse_config_file(str(path))

    def test_manifest_round_trip(self, tmp_path):
        rows = [("q1", "p1", ["n1", "n2"]), ("q2", "p2", ["n3"])]
        path = tmp_path / "train.tsv"
        write_manifest(str(path), rows)
        assert read_manifest(str(path)) == rows

    def test_manifest_malformed_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("q1\tp1\n")
        with pytest.raises(ParseError):
            read_manifest(str(path))


def test_scores_read_at_own_eos_under_batch_padding():
    # padding a shorter sequence to the batch max must not move its score
    model = tiny_model(seed=6)
    tok = ByteTokenizer()
    ids = tok.encode("short one") + [tok.eos_id]
    lone = model.score(np.asarray(ids))
    padded = np.full(48, model.config.pad_id, dtype=np.int64)
    padded[: len(ids)] = ids
    assert model.score(padded, eos_pos=len(ids) - 1) == lone

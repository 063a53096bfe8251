"""Model-stack tests: forward oracles, score head, attention block examples,
finite-difference gradient checks, parameter counting, checkpoint round-trip.
"""

import numpy as np
import pytest
from helpers_fd import assert_grads_close, central_diff

from ssmrank.errors import ContractError, InputError, ValidationError
from ssmrank.model import (
    ModelConfig,
    RerankModel,
    Tape,
    count_params_formula,
    load_checkpoint,
    record,
    save_checkpoint,
)
from ssmrank.model.autodiff import Tensor
from ssmrank.model.blocks import (
    causal_attention,
    selective_scan_tensor,
    ssd_chunked_tensor,
)
from ssmrank.ssm import (
    SelectiveTrace,
    SsdHeadParams,
    SsdTrace,
    selective_scan_sequential,
    ssd_forward_sequential,
)


def tiny_config(kind: str, **kw) -> ModelConfig:
    base = dict(
        vocab_size=16,
        d_model=4,
        n_layers=2,
        block_kind=kind,
        state_size=3,
        head_dim=2,
        n_heads=2,
        max_seq_len=16,
        chunk_len=4,
        eos_id=15,
        pad_id=14,
    )
    base.update(kw)
    return ModelConfig(**base)


# ---------------------------------------------------------------------------
# straight-line forward oracle for the selective-scan model
# ---------------------------------------------------------------------------

def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _silu(x):
    return x * _sigmoid(x)


def _rmsnorm(x, g):
    return x / np.sqrt(np.mean(x * x, axis=-1, keepdims=True) + 1e-6) * g


def straightline_mamba1_forward(ids, arrays, cfg):
    """Independent plain-numpy re-derivation of the selective-scan model."""
    d, e, n, w = cfg.d_model, cfg.inner_dim, cfg.state_size, cfg.local_conv_width
    x = arrays["embed.tok"][ids]
    length = len(ids)
    for i in range(cfg.n_layers):
        pre = f"layer{i}"
        normed = _rmsnorm(x, arrays[f"{pre}.norm.g"])
        uz = normed @ arrays[f"{pre}.in_proj.w"] + arrays[f"{pre}.in_proj.b"]
        u, z = uz[:, :e], uz[:, e:]
        conv_w, conv_b = arrays[f"{pre}.conv.w"], arrays[f"{pre}.conv.b"]
        conv = np.zeros_like(u)
        for t in range(length):
            for j in range(w):
                src = t - (w - 1) + j
                if src >= 0:
                    conv[t] += conv_w[j] * u[src]
        u = _silu(conv + conv_b)
        delta = np.log1p(np.exp(u @ arrays[f"{pre}.dt.w"] + arrays[f"{pre}.dt.b"]))
        b_t = u @ arrays[f"{pre}.b_proj.w"]
        c_t = u @ arrays[f"{pre}.c_proj.w"]
        a = -np.exp(arrays[f"{pre}.a_log"])
        h = np.zeros((e, n))
        y = np.zeros((length, e))
        for t in range(length):
            a_bar = np.exp(delta[t][:, None] * a)
            b_bar = (a_bar - 1.0) / a * b_t[t][None, :]
            h = a_bar * h + b_bar * u[t][:, None]
            y[t] = h @ c_t[t]
        y = y * _silu(z)
        x = x + y @ arrays[f"{pre}.out_proj.w"] + arrays[f"{pre}.out_proj.b"]
    return _rmsnorm(x, arrays["final_norm.g"])


class TestForward:
    def test_single_token_and_replay(self):
        model = RerankModel(tiny_config("mamba1"), seed=1)
        hidden, tape = model.forward([3])
        assert hidden.data.shape == (1, model.config.d_model)
        before = hidden.data.copy()
        tape.replay()
        assert np.array_equal(hidden.data, before)

    @pytest.mark.parametrize("kind", ["mamba1", "mamba2", "attention"])
    def test_shared_prefix_rows_identical(self, kind):
        model = RerankModel(tiny_config(kind), seed=2)
        a = [1, 2, 3, 4, 5, 6]
        b = [1, 2, 3, 4, 9, 10]
        ha, _ = model.forward(a, record_tape=False)
        hb, _ = model.forward(b, record_tape=False)
        assert np.array_equal(ha.data[:4], hb.data[:4])

    def test_matches_straightline_oracle(self):
        cfg = tiny_config("mamba1", d_model=8, state_size=4)
        model = RerankModel(cfg, seed=3)
        ids = np.array([1, 5, 2, 7, 0, 11, 3])
        hidden, _ = model.forward(ids, record_tape=False)
        ref = straightline_mamba1_forward(ids, {k: t.data for k, t in model.params.items()}, cfg)
        np.testing.assert_allclose(hidden.data, ref, rtol=1e-12, atol=1e-14)

    def test_out_of_vocab_reports_position(self):
        model = RerankModel(tiny_config("mamba1"), seed=4)
        with pytest.raises(InputError, match="position 2"):
            model.forward([1, 2, 99, 3])

    def test_too_long_rejected(self):
        model = RerankModel(tiny_config("mamba1"), seed=5)
        with pytest.raises(ContractError):
            model.forward(list(range(10)) * 3)


class TestScore:
    def test_zero_weight_gives_bias(self):
        model = RerankModel(tiny_config("mamba1"), seed=6)
        model.params["head.w"].data[:] = 0.0
        model.params["head.b"].data = np.asarray(1.25)
        assert model.score([1, 2, 15]) == pytest.approx(1.25, abs=1e-15)

    def test_one_hot_weight_reads_hidden(self):
        model = RerankModel(tiny_config("mamba1"), seed=7)
        model.params["head.w"].data[:] = 0.0
        model.params["head.w"].data[2] = 1.0
        model.params["head.b"].data = np.asarray(0.5)
        hidden, _ = model.forward([4, 9, 15], record_tape=False)
        assert model.score([4, 9, 15]) == pytest.approx(hidden.data[-1, 2] + 0.5, rel=1e-15)

    def test_manual_dot_product(self):
        model = RerankModel(tiny_config("mamba2"), seed=8)
        ids = [3, 1, 4, 15]
        hidden, _ = model.forward(ids, record_tape=False)
        manual = float(hidden.data[-1] @ model.params["head.w"].data
                       + model.params["head.b"].data)
        assert model.score(ids) == pytest.approx(manual, rel=1e-12)

    def test_missing_end_marker_rejected(self):
        model = RerankModel(tiny_config("mamba1"), seed=9)
        with pytest.raises(ContractError):
            model.score([1, 2, 3])

    @pytest.mark.parametrize("kind", ["mamba1", "mamba2", "attention"])
    def test_score_ignores_tokens_after_end_marker(self, kind):
        cfg = tiny_config(kind)
        model = RerankModel(cfg, seed=10)
        ids = [5, 3, 15]
        padded = ids + [cfg.pad_id, cfg.pad_id, 7]
        assert model.score(padded, eos_pos=2) == model.score(ids)


class TestAttentionBlock:
    def _params(self, cfg, seed):
        return RerankModel(cfg, seed=seed).params

    def test_single_position_is_value_projection(self):
        cfg = tiny_config("attention")
        p = self._params(cfg, 11)
        x = np.random.default_rng(0).standard_normal((1, cfg.d_model))
        out = causal_attention(Tensor(x), p, "layer0", cfg)
        v = x @ p["layer0.attn.wv"].data + p["layer0.attn.bv"].data
        ref = v @ p["layer0.attn.wo"].data + p["layer0.attn.bo"].data
        np.testing.assert_allclose(out.data, ref, rtol=1e-12)

    def test_zeroed_queries_give_causal_running_mean(self):
        cfg = tiny_config("attention")
        p = self._params(cfg, 12)
        p["layer0.attn.wq"].data[:] = 0.0
        p["layer0.attn.bq"].data[:] = 0.0
        p["layer0.attn.wk"].data[:] = 0.0
        p["layer0.attn.bk"].data[:] = 0.0
        p["layer0.attn.wo"].data = np.eye(cfg.d_model)
        p["layer0.attn.bo"].data[:] = 0.0
        x = np.random.default_rng(1).standard_normal((5, cfg.d_model))
        out = causal_attention(Tensor(x), p, "layer0", cfg)
        v = x @ p["layer0.attn.wv"].data + p["layer0.attn.bv"].data
        running_mean = np.cumsum(v, axis=0) / np.arange(1, 6)[:, None]
        np.testing.assert_allclose(out.data, running_mean, rtol=1e-12)

    def test_matches_double_loop_oracle(self):
        cfg = tiny_config("attention", d_model=6, n_heads=2)
        p = self._params(cfg, 13)
        rng = np.random.default_rng(2)
        x = rng.standard_normal((8, 6))
        out = causal_attention(Tensor(x), p, "layer0", cfg)
        q = x @ p["layer0.attn.wq"].data + p["layer0.attn.bq"].data
        k = x @ p["layer0.attn.wk"].data + p["layer0.attn.bk"].data
        v = x @ p["layer0.attn.wv"].data + p["layer0.attn.bv"].data
        hd = 3
        merged = np.zeros((8, 6))
        for h in range(2):
            sl = slice(h * hd, (h + 1) * hd)
            for t in range(8):
                logits = np.array([q[t, sl] @ k[s, sl] / np.sqrt(hd) for s in range(t + 1)])
                weights = np.exp(logits - logits.max())
                weights /= weights.sum()
                merged[t, sl] = sum(weights[s] * v[s, sl] for s in range(t + 1))
        ref = merged @ p["layer0.attn.wo"].data + p["layer0.attn.bo"].data
        np.testing.assert_allclose(out.data, ref, rtol=1e-11, atol=1e-13)


class TestScanTensorAgainstLibrary:
    def test_selective_scan_tensor_matches_numpy_reference(self):
        rng = np.random.default_rng(14)
        length, e, n = 12, 3, 4
        u = rng.standard_normal((length, e))
        delta = rng.uniform(0.05, 0.5, (length, e))
        b_t = rng.standard_normal((length, n))
        c_t = rng.standard_normal((length, n))
        a = -rng.uniform(0.2, 2.0, (e, n))
        out = selective_scan_tensor(Tensor(u), Tensor(delta), Tensor(b_t), Tensor(c_t), Tensor(a))
        ref = selective_scan_sequential(u, SelectiveTrace(delta, b_t, c_t), a)
        np.testing.assert_allclose(out.data, ref, rtol=1e-12, atol=1e-14)

    def test_ssd_chunked_tensor_matches_numpy_reference(self):
        cfg = tiny_config("mamba2", d_model=4, head_dim=2, state_size=3, chunk_len=5)
        heads = cfg.ssd_heads  # inner=8, P=2 -> 4 heads
        rng = np.random.default_rng(15)
        length, p_dim, n = 13, cfg.head_dim, cfg.state_size
        u = rng.standard_normal((length, heads * p_dim))
        delta = rng.uniform(0.05, 0.5, (length, heads))
        b_flat = rng.standard_normal((length, heads * n))
        c_flat = rng.standard_normal((length, heads * n))
        a = -rng.uniform(0.2, 2.0, heads)
        out = ssd_chunked_tensor(
            Tensor(u), Tensor(delta), Tensor(b_flat), Tensor(c_flat), Tensor(a), cfg
        )
        trace = SsdTrace(
            delta=delta,
            b=b_flat.reshape(length, heads, n),
            c=c_flat.reshape(length, heads, n),
        )
        params = SsdHeadParams(num_heads=heads, head_dim=p_dim, state_size=n, a_scalar=a)
        ref = ssd_forward_sequential(u, params, trace)
        np.testing.assert_allclose(out.data, ref, rtol=1e-10, atol=1e-13)


class TestGradients:
    @pytest.mark.parametrize("kind", ["mamba1", "mamba2", "attention"])
    def test_full_finite_difference_check(self, kind):
        cfg = tiny_config(kind)
        model = RerankModel(cfg, seed=20)
        ids = np.array([1, 7, 3, 9, 2, 15])

        tape = Tape()
        with record(tape):
            score = model.score_tensor(ids)
        model.zero_grads()
        tape.backward(score)

        for name, param in model.params.items():
            numeric = central_diff(lambda: model.score(ids), param.data, h=1e-5)
            analytic = param.grad if param.grad is not None else np.zeros_like(param.data)
            assert_grads_close(analytic, numeric, rtol=1e-4, atol=1e-8)

    def test_untouched_embedding_rows_get_zero_gradient(self):
        model = RerankModel(tiny_config("mamba1"), seed=21)
        ids = np.array([1, 2, 15])
        tape = Tape()
        with record(tape):
            score = model.score_tensor(ids)
        model.zero_grads()
        tape.backward(score)
        grad = model.params["embed.tok"].grad
        untouched = [i for i in range(16) if i not in (1, 2, 15)]
        np.testing.assert_array_equal(grad[untouched], 0.0)


class TestParamAccounting:
    @pytest.mark.parametrize("kind", ["mamba1", "mamba2", "attention"])
    def test_formula_matches_counted_sum(self, kind):
        cfg = tiny_config(kind)
        model = RerankModel(cfg, seed=22)
        assert model.parameter_count() == count_params_formula(cfg)

    def test_same_seed_same_params(self):
        a = RerankModel(tiny_config("mamba2"), seed=23)
        b = RerankModel(tiny_config("mamba2"), seed=23)
        for name in a.params:
            assert np.array_equal(a.params[name].data, b.params[name].data)

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            tiny_config("mamba3")
        with pytest.raises(ValidationError):
            tiny_config("attention", d_model=5, n_heads=2)


class TestCheckpoint:
    @pytest.mark.parametrize("kind", ["mamba1", "mamba2", "attention"])
    def test_round_trip_bit_exact(self, tmp_path, kind):
        model = RerankModel(tiny_config(kind), seed=24)
        path = str(tmp_path / "model.npz")
        save_checkpoint(path, model)
        loaded = load_checkpoint(path)
        assert loaded.config == model.config
        assert set(loaded.params) == set(model.params)
        for name in model.params:
            assert np.array_equal(loaded.params[name].data, model.params[name].data)
        ids = [1, 2, 15]
        assert loaded.score(ids) == model.score(ids)

    def test_bad_file_reports_input_error(self, tmp_path):
        path = tmp_path / "junk.npz"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(InputError):
            load_checkpoint(str(path))

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualloop.codec import CodecConfig, decode, encode, init_codec
from dualloop.core import AudioWindow, LatentParams, LatentVector, RangeError, Rng
from dualloop.feedback import (
    FeedbackConfig,
    FeedbackState,
    Limiter,
    Manipulation,
    Offset,
    Override,
    apply_manipulation,
    blend,
    mix_input,
    process_window,
)

CFG = CodecConfig(window_size=32, hop=32, latent_dims=4, hidden_units=8)


def window(values, sr=16000, index=0):
    return AudioWindow(np.asarray(values, dtype=float), sr, index=index)


def state_with(prev_mean=None, prev_ls=None, prev_out=None):
    params = None
    if prev_mean is not None:
        params = LatentParams(np.asarray(prev_mean, float), np.asarray(prev_ls, float))
    return FeedbackState(prev_params=params, prev_output=prev_out)


class TestMixInput:
    def test_zero_gain_hardclip_is_identity(self):
        dry = window([0.5, -0.5, 1.0, -1.0])
        prev = window([0.9, 0.9, 0.9, 0.9])
        out = mix_input(dry, FeedbackState(prev_output=prev), 0.0, Limiter.HARD_CLIP)
        assert np.array_equal(out.samples, dry.samples)

    def test_absent_previous_window(self):
        dry = window([0.3, -0.2, 0.1, 0.0])
        out = mix_input(dry, FeedbackState(), 2.0, Limiter.HARD_CLIP)
        assert np.array_equal(out.samples, dry.samples)

    def test_tanh_of_unit_sum(self):
        # 1.0 + 1.0*1.0 through the tanh limiter: tanh(2.0) = 0.96403...
        dry = window([1.0])
        prev = window([1.0])
        out = mix_input(dry, FeedbackState(prev_output=prev), 1.0, Limiter.TANH)
        assert out.samples[0] == pytest.approx(math.tanh(2.0), abs=1e-12)
        assert out.samples[0] == pytest.approx(0.96403, abs=1e-5)

    @given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=16),
           st.floats(0.0, 4.0))
    def test_limiter_bounds(self, samples, gain):
        dry = window(samples)
        prev = window([(-1.0) ** i for i in range(len(samples))])
        st_ = FeedbackState(prev_output=prev)
        hard = mix_input(dry, st_, gain, Limiter.HARD_CLIP)
        soft = mix_input(dry, st_, gain, Limiter.TANH)
        assert np.all(hard.samples >= -1.0) and np.all(hard.samples <= 1.0)
        assert np.all(np.abs(soft.samples) < 1.0)


class TestBlend:
    def test_alpha_zero_passthrough(self):
        cur = LatentParams(np.array([1.0, 2.0]), np.array([0.1, 0.2]))
        st_ = state_with([9.0, 9.0], [9.0, 9.0])
        out = blend(cur, st_, np.zeros(2))
        assert np.array_equal(out.mean, cur.mean)
        assert np.array_equal(out.log_scale, cur.log_scale)

    def test_alpha_one_freezes_previous(self):
        cur = LatentParams(np.array([1.0, 2.0]), np.array([0.1, 0.2]))
        st_ = state_with([9.0, -9.0], [3.0, -3.0])
        out = blend(cur, st_, np.ones(2))
        assert np.array_equal(out.mean, st_.prev_params.mean)
        assert np.array_equal(out.log_scale, st_.prev_params.log_scale)

    def test_midpoint(self):
        cur = LatentParams(np.array([1.0]), np.array([0.0]))
        st_ = state_with([0.0], [0.0])
        out = blend(cur, st_, np.array([0.5]))
        assert out.mean[0] == 0.5

    def test_absent_state_is_identity(self):
        cur = LatentParams(np.array([1.0, -1.0]), np.array([0.5, -0.5]))
        out = blend(cur, FeedbackState(), np.array([0.7, 0.7]))
        assert np.array_equal(out.mean, cur.mean)

    def test_length_mismatch_rejected(self):
        from dualloop.core import SizeMismatchError

        cur = LatentParams(np.zeros(2), np.zeros(2))
        st_ = state_with([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
        with pytest.raises(SizeMismatchError):
            blend(cur, st_, np.zeros(3))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60)
    def test_convex_combination_property(self, seed):
        rng = Rng(seed)
        d = 4
        cur = LatentParams(rng.normals(d) * 3, rng.normals(d))
        prev = LatentParams(rng.normals(d) * 3, rng.normals(d))
        alpha = rng.uniform(0.0, 1.0, d)
        out = blend(cur, FeedbackState(prev_params=prev), alpha)
        lo = np.minimum(cur.mean, prev.mean) - 1e-12
        hi = np.maximum(cur.mean, prev.mean) + 1e-12
        assert np.all(out.mean >= lo) and np.all(out.mean <= hi)
        lo = np.minimum(cur.log_scale, prev.log_scale) - 1e-12
        hi = np.maximum(cur.log_scale, prev.log_scale) + 1e-12
        assert np.all(out.log_scale >= lo) and np.all(out.log_scale <= hi)


class TestManipulation:
    def params(self):
        return LatentParams(np.array([0.25, 1.0, -1.0, 0.0]), np.zeros(4))

    def test_empty_is_identity(self):
        p = self.params()
        out = apply_manipulation(p, Manipulation())
        assert np.array_equal(out.mean, p.mean)

    def test_override_wins_regardless_of_input(self):
        m = Manipulation({3: Override(2.5)})
        out = apply_manipulation(self.params(), m)
        assert out.mean[3] == 2.5

    def test_offset_adds(self):
        m = Manipulation({0: Offset(-1.0)})
        out = apply_manipulation(self.params(), m)
        assert out.mean[0] == -0.75

    def test_scales_untouched(self):
        m = Manipulation({0: Override(5.0), 2: Offset(1.0)})
        out = apply_manipulation(self.params(), m)
        assert np.array_equal(out.log_scale, self.params().log_scale)

    def test_out_of_range_dimension(self):
        with pytest.raises(RangeError):
            apply_manipulation(self.params(), Manipulation({4: Offset(1.0)}))


def noise_windows(n, cfg=CFG, seed=100, scale=0.5):
    rng = Rng(seed)
    return [AudioWindow(np.clip(rng.normals(cfg.window_size) * scale, -1, 1),
                        cfg.sample_rate, index=i) for i in range(n)]


def run_pipeline(model, fb, windows, rng_seed=7, manips=None):
    state = FeedbackState()
    rng = Rng(rng_seed)
    traces, outs = [], []
    for i, w in enumerate(windows):
        manip = manips.get(i, Manipulation()) if manips else Manipulation()
        out, state, trace = process_window(model, fb, state, w, manip, rng)
        outs.append(out)
        traces.append(trace)
    return outs, traces


class TestProcessWindow:
    def test_collapses_to_plain_autoencoding_when_quiet(self):
        # Gain 0, alpha 0, no manipulation, scale forced down to e^-30:
        # the pipeline is encode -> decode of the mean, up to vanishing noise.
        cfg = CodecConfig(window_size=32, hop=32, latent_dims=4, hidden_units=8,
                          log_scale_min=-30.0)
        model = init_codec(cfg, Rng(1))
        model.weights["ls_w"][:] = 0.0
        model.weights["ls_b"][:] = -40.0
        fb = FeedbackConfig(alpha=np.zeros(4), limiter=Limiter.HARD_CLIP)
        wins = noise_windows(5, cfg)
        outs, _ = run_pipeline(model, fb, wins)
        for w, out in zip(wins, outs):
            plain = decode(model, LatentVector(encode(model, w).mean))
            assert np.max(np.abs(out.samples - plain.samples)) < 1e-6

    def test_deterministic_latent_flag_collapses_exactly(self):
        model = init_codec(CFG, Rng(2))
        fb = FeedbackConfig(alpha=np.zeros(4), limiter=Limiter.HARD_CLIP,
                            deterministic_latent=True)
        wins = noise_windows(3)
        outs, _ = run_pipeline(model, fb, wins)
        for w, out in zip(wins, outs):
            plain = decode(model, LatentVector(encode(model, w).mean))
            assert np.array_equal(out.samples, plain.samples)

    def test_alpha_one_freezes_trace(self):
        model = init_codec(CFG, Rng(3))
        fb = FeedbackConfig(alpha=np.ones(4), deterministic_latent=True)
        _, traces = run_pipeline(model, fb, noise_windows(6))
        for tr in traces[1:]:
            assert np.array_equal(tr.mean, traces[0].mean)
            assert np.array_equal(tr.log_scale, traces[0].log_scale)

    def test_manipulation_circulates_through_feedback(self):
        # Override then hands off: with alpha=1 the injected value persists.
        model = init_codec(CFG, Rng(4))
        fb = FeedbackConfig(alpha=np.ones(4), deterministic_latent=True)
        manips = {2: Manipulation({1: Override(123.0)})}
        _, traces = run_pipeline(model, fb, noise_windows(8), manips=manips)
        for tr in traces[2:]:
            assert tr.mean[1] == 123.0
        assert traces[1].mean[1] != 123.0

    def test_smoothing_reduces_interwindow_change(self):
        model = init_codec(CFG, Rng(5))
        wins = noise_windows(60, seed=55)

        def mean_delta(alpha):
            fb = FeedbackConfig(alpha=np.full(4, alpha), deterministic_latent=True)
            _, traces = run_pipeline(model, fb, wins)
            deltas = [np.mean(np.abs(traces[i].mean - traces[i - 1].mean))
                      for i in range(1, len(traces))]
            return float(np.mean(deltas))

        assert mean_delta(0.8) < mean_delta(0.0)

    def test_new_state_carries_post_manipulation_params(self):
        model = init_codec(CFG, Rng(6))
        fb = FeedbackConfig(alpha=np.zeros(4), deterministic_latent=True)
        state = FeedbackState()
        manip = Manipulation({0: Override(9.0)})
        _, state, trace = process_window(model, fb, state, noise_windows(1)[0], manip, Rng(0))
        assert state.prev_params.mean[0] == 9.0
        assert trace.mean[0] == 9.0

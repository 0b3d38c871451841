"""Seeded synthetic corpora for training the two models at desk scale."""

from __future__ import annotations

import numpy as np

from .codec import CodecConfig
from .core import AudioWindow, Rng
from .mdrnn import VECTOR_DIM


def make_sine_corpus(config: CodecConfig, n_windows: int, rng: Rng) -> list[AudioWindow]:
    """Windows of 2-4 mixed sinusoids with random frequency, phase, amplitude.

    Component amplitudes are normalized so each window peaks at 0.9 at most.
    """
    windows = []
    t = np.arange(config.window_size) / config.sample_rate
    nyquist = config.sample_rate / 2.0
    for idx in range(n_windows):
        n_components = rng.integers(2, 5)
        samples = np.zeros(config.window_size)
        for _ in range(n_components):
            freq = rng.uniform(50.0, min(2000.0, 0.8 * nyquist))
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = rng.uniform(0.2, 1.0)
            samples += amp * np.sin(2.0 * np.pi * freq * t + phase)
        peak = np.max(np.abs(samples))
        if peak > 0:
            samples *= 0.9 / peak
        windows.append(AudioWindow(samples, config.sample_rate, index=idx))
    return windows


def _channel_pattern(rng: Rng, times: np.ndarray) -> np.ndarray:
    """One controller's trajectory over the sequence: sinusoid, ramp, or steps."""
    kind = rng.integers(0, 3)
    if kind == 0:  # slow sinusoid
        freq = rng.uniform(0.1, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        values = 0.5 + 0.4 * np.sin(2.0 * np.pi * freq * times + phase)
    elif kind == 1:  # linear ramp
        a, b = rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)
        span = times[-1] - times[0] if times[-1] > times[0] else 1.0
        values = a + (b - a) * (times - times[0]) / span
    else:  # held steps, occasionally jumping
        values = np.empty_like(times)
        level = rng.uniform(0.0, 1.0)
        for i in range(times.size):
            if rng.uniform() < 0.15:
                level = rng.uniform(0.0, 1.0)
            values[i] = level
    return np.clip(values, 0.0, 1.0)


def make_gesture_corpus(n_sequences: int, length: int, rng: Rng,
                        dt_mean: float = 0.05, dt_min: float = 0.001) -> list[np.ndarray]:
    """Sequences of [dt, c1..c8] rows mimicking slow controller gestures.

    Update intervals are exponentially distributed around dt_mean; the eight
    channels follow independent sinusoid / ramp / step patterns evaluated at
    the cumulative event times.
    """
    corpus = []
    for _ in range(n_sequences):
        dts = rng.exponential(dt_mean, length) + dt_min
        times = np.cumsum(dts)
        seq = np.empty((length, VECTOR_DIM))
        seq[:, 0] = dts
        for ch in range(1, VECTOR_DIM):
            seq[:, ch] = _channel_pattern(rng, times)
        corpus.append(seq)
    return corpus

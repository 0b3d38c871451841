"""Latent-feedback synthesis pipeline over the codec.

Three coupled mechanisms run per window, in a fixed order:

  1. the previous output window, scaled by a gain, is mixed back into the
     dry input (audio feedback, through a limiter);
  2. the freshly inferred latent parameters are convex-blended, dimension by
     dimension, with the parameters remembered from the previous window
     (latent feedback: alpha=0 passes through, alpha=1 freezes the past);
  3. individual latent means are offset or overridden from outside before
     sampling and decoding (direct manipulation).

The state stored for the next window is the post-manipulation parameters, so
a manipulated dimension keeps circulating through later blends.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .codec import CodecModel, decode, encode
from .core import (
    AudioWindow,
    ConfigurationError,
    LatentParams,
    LatentVector,
    RangeError,
    Rng,
    SizeMismatchError,
    gaussian_sample,
)


class Limiter(enum.Enum):
    TANH = "tanh"
    HARD_CLIP = "hardclip"


@dataclass
class FeedbackConfig:
    """Per-dimension blend coefficients plus the audio feedback gain.

    deterministic_latent swaps the per-dimension Gaussian draw for the mean,
    for exactly reproducible renders.
    """

    alpha: np.ndarray
    audio_gain: float = 0.0
    limiter: Limiter = Limiter.TANH
    deterministic_latent: bool = False

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        if self.alpha.ndim != 1:
            raise ConfigurationError("alpha must be a vector, one entry per latent dim")
        if np.any(self.alpha < 0.0) or np.any(self.alpha > 1.0):
            raise ConfigurationError("every alpha entry must lie in [0, 1]")
        if not np.isfinite(self.audio_gain) or self.audio_gain < 0.0:
            raise ConfigurationError("audio_gain must be finite and >= 0")


@dataclass(frozen=True)
class Offset:
    delta: float


@dataclass(frozen=True)
class Override:
    value: float


ManipEntry = Union[Offset, Override]


@dataclass
class Manipulation:
    """At most one entry per latent dimension, applied to the mean only."""

    entries: dict[int, ManipEntry] = field(default_factory=dict)

    def set(self, dim: int, entry: ManipEntry) -> None:
        self.entries[dim] = entry

    def clear(self, dim: Optional[int] = None) -> None:
        if dim is None:
            self.entries.clear()
        else:
            self.entries.pop(dim, None)

    def copy(self) -> "Manipulation":
        return Manipulation(dict(self.entries))


@dataclass
class FeedbackState:
    """What the previous window left behind; empty before the first window."""

    prev_params: Optional[LatentParams] = None
    prev_output: Optional[AudioWindow] = None


def mix_input(dry: AudioWindow, state: FeedbackState, gain: float,
              limiter: Limiter) -> AudioWindow:
    """Mix the previous output back into the dry input, then limit."""
    if state.prev_output is not None and len(state.prev_output) != len(dry):
        raise SizeMismatchError("previous output window length differs from dry input")
    mixed = dry.samples.copy()
    if state.prev_output is not None and gain != 0.0:
        mixed = mixed + gain * state.prev_output.samples
    if limiter is Limiter.TANH:
        mixed = np.tanh(mixed)
    else:
        mixed = np.clip(mixed, -1.0, 1.0)
    return AudioWindow(mixed, dry.sample_rate, index=dry.index)


def blend(current: LatentParams, state: FeedbackState, alpha: np.ndarray) -> LatentParams:
    """Convex, per-dimension pull toward the previous window's parameters.

    Means and log-scales blend by the same rule; working in the log domain
    keeps the implied scale positive for any alpha in [0, 1]. With no stored
    previous state this is the identity.
    """
    if state.prev_params is None:
        return current.copy()
    prev = state.prev_params
    if not (len(prev) == len(current) == alpha.size):
        raise SizeMismatchError("blend inputs must all have the latent dimensionality")
    mean = alpha * prev.mean + (1.0 - alpha) * current.mean
    log_scale = alpha * prev.log_scale + (1.0 - alpha) * current.log_scale
    return LatentParams(mean, log_scale)


def apply_manipulation(params: LatentParams, manip: Manipulation) -> LatentParams:
    """Offset or override individual latent means; scales stay untouched."""
    if not manip.entries:
        return params.copy()
    out = params.copy()
    for dim, entry in manip.entries.items():
        if not (0 <= dim < len(params)):
            raise RangeError(f"manipulation dimension {dim} outside 0..{len(params) - 1}")
        if isinstance(entry, Offset):
            out.mean[dim] += entry.delta
        else:
            out.mean[dim] = entry.value
    return out


def process_window(model: CodecModel, config: FeedbackConfig, state: FeedbackState,
                   dry: AudioWindow, manip: Manipulation,
                   rng: Rng) -> tuple[AudioWindow, FeedbackState, LatentParams]:
    """Run one window through the whole pipeline.

    Returns (output window, next state, trace), where the trace is the
    post-manipulation latent parameters actually decoded from - the same
    thing the next window will blend against.
    """
    d = model.config.latent_dims
    if config.alpha.size != d:
        raise SizeMismatchError(
            f"alpha has {config.alpha.size} entries, model has {d} latent dims")
    mixed = mix_input(dry, state, config.audio_gain, config.limiter)
    current = encode(model, mixed)
    blended = blend(current, state, config.alpha)
    manipulated = apply_manipulation(blended, manip)
    if config.deterministic_latent:
        z = manipulated.mean.copy()
    else:
        z = np.array([
            gaussian_sample(manipulated.mean[i], manipulated.log_scale[i], rng)
            for i in range(d)
        ])
    out = decode(model, LatentVector(z), index=dry.index)
    new_state = FeedbackState(prev_params=manipulated.copy(), prev_output=out)
    return out, new_state, manipulated


def write_trace_csv(path, traces: list[LatentParams], indices=None) -> None:
    """One row per window: index, D means, D log-scales."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if not traces:
            return
        d = len(traces[0])
        writer.writerow(["index"] + [f"mean_{i}" for i in range(d)]
                        + [f"log_scale_{i}" for i in range(d)])
        for row_i, tr in enumerate(traces):
            idx = indices[row_i] if indices is not None else row_i
            writer.writerow([idx] + [repr(v) for v in tr.mean]
                            + [repr(v) for v in tr.log_scale])

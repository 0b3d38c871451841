"""Shared domain types: audio windows, latent parameters, control events,
the simulated clock, and explicitly seeded randomness.

Everything here is a plain value object, safe to copy between threads.
The one exception is Rng, which is single-owner: hand it off, never share it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class SizeMismatchError(ValueError):
    """A vector or window does not have the configured length."""


class ConfigurationError(ValueError):
    """Invalid configuration value, empty corpus, or malformed config file."""


class NumericalError(ArithmeticError):
    """Non-finite values appeared where the math requires finite ones."""


class OrderingError(ValueError):
    """An event timestamp went backwards."""


class RangeError(ValueError):
    """A channel, dimension, or value is outside its allowed range."""


class FramingError(ValueError):
    """A byte stream ended mid-message."""


class UnsupportedMessageError(ValueError):
    """A wire message of a kind this codec does not handle."""

    def __init__(self, status_byte: int):
        self.status_byte = status_byte
        super().__init__(f"unsupported status byte 0x{status_byte:02X}")


class ProtocolError(ValueError):
    """A malformed or invalid control-protocol message."""


class FileFormatError(OSError):
    """A file is not in the expected on-disk format."""


def require_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"non-finite values in {what}")


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass
class AudioWindow:
    """One fixed-length block of mono audio.

    ``padding`` counts zero-fill samples at the tail; it is nonzero only for
    the final partial window produced when reading a file whose length is not
    a multiple of the window size.
    """

    samples: np.ndarray
    sample_rate: int
    index: int = 0
    padding: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        require_finite(self.samples, "audio window samples")
        if self.samples.ndim != 1:
            raise SizeMismatchError("audio window must be a 1-d sample vector")
        if self.samples.size and np.max(np.abs(self.samples)) > 1.0:
            raise RangeError("audio window samples must lie in [-1, 1]")

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class LatentVector:
    """A concrete point in the codec's latent space."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        require_finite(self.values, "latent vector")

    def __len__(self) -> int:
        return self.values.size


@dataclass
class LatentParams:
    """Per-dimension (mean, log-scale) of a diagonal Gaussian over latents.

    Scales are kept in the log domain so positivity is structural: any finite
    log_scale implies exp(log_scale) > 0.
    """

    mean: np.ndarray
    log_scale: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.log_scale = np.asarray(self.log_scale, dtype=np.float64)
        if self.mean.shape != self.log_scale.shape or self.mean.ndim != 1:
            raise SizeMismatchError("mean and log_scale must be 1-d vectors of equal length")
        require_finite(self.mean, "latent mean")
        require_finite(self.log_scale, "latent log_scale")

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    def __len__(self) -> int:
        return self.mean.size

    def copy(self) -> "LatentParams":
        return LatentParams(self.mean.copy(), self.log_scale.copy())


class Source(enum.Enum):
    HUMAN = "human"
    MODEL = "model"


NUM_CONTROL_CHANNELS = 8


@dataclass(frozen=True)
class ControlEvent:
    """One timestamped, normalized controller update on one of 8 channels."""

    time: float
    channel: int
    value: float
    source: Source

    def __post_init__(self):
        if not (0 <= self.channel < NUM_CONTROL_CHANNELS):
            raise RangeError(f"channel {self.channel} outside 0..{NUM_CONTROL_CHANNELS - 1}")
        if not (0.0 <= self.value <= 1.0):
            raise RangeError(f"control value {self.value} outside [0, 1]")
        if not (math.isfinite(self.time) and self.time >= 0.0):
            raise RangeError(f"event time {self.time} must be finite and non-negative")


# ---------------------------------------------------------------------------
# Clock
# ---------------------------------------------------------------------------

DEFAULT_TICK = 0.01  # seconds; one tenth of the 0.1 s lead switchover


class Clock:
    """Deterministic simulated clock advancing in fixed ticks.

    Time is always computed as steps * tick (never accumulated), so tick
    boundaries like 10 * 0.01 == 0.1 are exact in double precision.
    """

    def __init__(self, tick: float = DEFAULT_TICK):
        if tick <= 0:
            raise ConfigurationError("clock tick must be positive")
        self.tick = float(tick)
        self.steps = 0

    @property
    def now(self) -> float:
        return self.steps * self.tick

    def advance(self) -> float:
        """Move one tick forward and return the new time."""
        self.steps += 1
        return self.now

    def advance_to(self, t: float) -> float:
        """Jump to the last tick boundary not after ``t`` (never backwards)."""
        steps = int(math.floor(t / self.tick + 1e-9))
        if steps < self.steps:
            raise OrderingError(f"clock cannot move backwards to {t}")
        self.steps = steps
        return self.now


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------

class Rng:
    """Explicitly seeded PCG64 stream.

    Identical seeds give identical streams on every platform. Single-owner by
    convention: a component that needs randomness is handed an Rng and keeps
    it; nothing else may draw from the same instance.
    """

    ALGORITHM = "pcg64"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self) -> float:
        return float(self._gen.standard_normal())

    def normals(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(n)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def exponential(self, scale: float, size=None):
        return self._gen.exponential(scale, size)

    def integers(self, low: int, high: int) -> int:
        return int(self._gen.integers(low, high))

    def fork(self) -> "Rng":
        """Derive an independent child stream; deterministic given this one."""
        return Rng(self.integers(0, 2**63 - 1))


def fresh_seed() -> int:
    """Pick a seed from OS entropy.

    Used only when the caller gave none; the chosen value must be recorded
    (e.g. in the session log) so the run stays replayable.
    """
    return int(np.random.SeedSequence().entropy % (2**63 - 1))


def gaussian_sample(mean: float, log_scale: float, rng: Rng) -> float:
    """Draw from N(mean, exp(log_scale)^2) using the given stream."""
    return mean + math.exp(log_scale) * rng.normal()

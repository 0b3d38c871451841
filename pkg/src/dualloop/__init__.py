"""Two feedback-coupled instruments behind one engine.

An audio-space path (codec + latent feedback) and a control-space path
(mixture-density RNN in a call-and-response loop), joined by a shared clock,
MIDI/WAV routing, and a WebSocket control protocol.
"""

__version__ = "0.1.0"

from .codec import CodecConfig, CodecModel, decode, encode, train_codec
from .core import (
    AudioWindow,
    Clock,
    ControlEvent,
    LatentParams,
    LatentVector,
    Rng,
    Source,
    gaussian_sample,
)
from .feedback import (
    FeedbackConfig,
    FeedbackState,
    Manipulation,
    Offset,
    Override,
    process_window,
)
from .interaction import InteractionConfig, InteractionEngine, LoopMode
from .mdrnn import GestureSample, MdrnnConfig, MixtureParams, nll, sample, step, train_mdrnn

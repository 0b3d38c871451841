"""One TOML file configures everything: [codec], [feedback], [mdrnn],
[interaction], [router], [server] sections plus a top-level seed.

Unknown sections or keys are rejected outright; a config typo should fail
loudly rather than silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from .codec import CodecConfig
from .core import ConfigurationError
from .feedback import FeedbackConfig, Limiter
from .interaction import InteractionConfig
from .mdrnn import MdrnnConfig
from .midi import MappingTable


@dataclass
class TrainSettings:
    epochs: int = 200
    learning_rate: float = 0.001
    corpus_windows: int = 32      # synthetic corpus size (codec)
    corpus_sequences: int = 8     # synthetic corpus size (mdrnn)
    corpus_length: int = 24


@dataclass
class FeedbackSettings:
    """Raw [feedback] section; alpha may be a scalar broadcast over all dims."""

    alpha: object = 0.0
    gain: float = 0.0
    limiter: str = "tanh"
    deterministic_latent: bool = False

    def build(self, latent_dims: int) -> FeedbackConfig:
        if isinstance(self.alpha, (int, float)):
            alpha = np.full(latent_dims, float(self.alpha))
        else:
            alpha = np.asarray(self.alpha, dtype=np.float64)
            if alpha.size != latent_dims:
                raise ConfigurationError(
                    f"alpha has {alpha.size} entries but latent_dims is {latent_dims}")
        try:
            limiter = Limiter(self.limiter)
        except ValueError:
            raise ConfigurationError(
                f"limiter must be 'tanh' or 'hardclip', got {self.limiter!r}") from None
        return FeedbackConfig(alpha=alpha, audio_gain=self.gain, limiter=limiter,
                              deterministic_latent=self.deterministic_latent)


@dataclass
class RouterConfig:
    audio_in: str = ""     # input WAV; silence when empty
    audio_out: str = ""    # rendered output WAV (run mode)
    midi_out: str = ""     # synth-facing virtual port, file-backed
    pad_out: str = ""      # pad-facing virtual port, file-backed
    midi_in: str = ""      # polled for incoming 3-byte messages when set
    session_log: str = ""  # JSONL session record (run mode)
    mapping: MappingTable = field(default_factory=MappingTable)


@dataclass
class ServerConfig:
    enabled: bool = True
    host: str = "127.0.0.1"
    port: int = 8765


@dataclass
class EngineConfig:
    codec: CodecConfig = field(default_factory=CodecConfig)
    feedback: FeedbackSettings = field(default_factory=FeedbackSettings)
    mdrnn: MdrnnConfig = field(default_factory=MdrnnConfig)
    interaction: InteractionConfig = field(default_factory=InteractionConfig)
    router: RouterConfig = field(default_factory=RouterConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    codec_train: TrainSettings = field(default_factory=TrainSettings)
    mdrnn_train: TrainSettings = field(default_factory=TrainSettings)
    codec_model: str = ""   # path to a trained codec; seeded init when empty
    mdrnn_model: str = ""   # path to a trained gesture model; seeded init when empty
    seed: int | None = None

    def feedback_config(self) -> FeedbackConfig:
        return self.feedback.build(self.codec.latent_dims)


_TRAIN_KEYS = {"epochs", "learning_rate", "corpus_windows",
               "corpus_sequences", "corpus_length"}

_SECTION_FIELDS = {
    "codec": {"window_size", "hop", "latent_dims", "hidden_units", "sample_rate",
              "beta", "log_scale_min", "log_scale_max"},
    "feedback": {"alpha", "gain", "limiter", "deterministic_latent"},
    "mdrnn": {"input_dim", "hidden_units", "layers", "mixtures", "dt_min"},
    "interaction": {"switchover", "pi_temperature", "sigma_temperature",
                    "max_model_rate", "tick"},
    "router": {"audio_in", "audio_out", "midi_out", "pad_out", "midi_in",
               "session_log"},
    "server": {"enabled", "host", "port"},
}


def _split_section(name: str, section: dict) -> tuple[dict, dict, str]:
    """Separate dataclass fields from training keys and the model path."""
    fields, train, model = {}, {}, ""
    allowed = _SECTION_FIELDS[name]
    for key, value in section.items():
        if key in allowed:
            fields[key] = value
        elif key in _TRAIN_KEYS and name in ("codec", "mdrnn"):
            train[key] = value
        elif key == "model" and name in ("codec", "mdrnn"):
            model = value
        else:
            raise ConfigurationError(f"unknown key '{key}' in [{name}]")
    return fields, train, model


def load_config(path) -> EngineConfig:
    try:
        raw = tomllib.loads(Path(path).read_text())
    except FileNotFoundError:
        raise
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return parse_config(raw, where=str(path))


def parse_config(raw: dict, where: str = "<config>") -> EngineConfig:
    cfg = EngineConfig()
    for name, section in raw.items():
        if name == "seed":
            cfg.seed = int(section)
            continue
        if name not in _SECTION_FIELDS:
            raise ConfigurationError(f"{where}: unknown section [{name}]")
        if not isinstance(section, dict):
            raise ConfigurationError(f"{where}: [{name}] must be a table")
        fields, train, model = _split_section(name, section)
        try:
            if name == "codec":
                cfg.codec = CodecConfig(**fields)
                cfg.codec_train = TrainSettings(**{**cfg.codec_train.__dict__, **train})
                cfg.codec_model = model or cfg.codec_model
            elif name == "feedback":
                cfg.feedback = FeedbackSettings(**fields)
            elif name == "mdrnn":
                cfg.mdrnn = MdrnnConfig(**fields)
                cfg.mdrnn_train = TrainSettings(**{**cfg.mdrnn_train.__dict__, **train})
                cfg.mdrnn_model = model or cfg.mdrnn_model
            elif name == "interaction":
                cfg.interaction = InteractionConfig(**fields)
            elif name == "router":
                cfg.router = RouterConfig(**fields)
            elif name == "server":
                cfg.server = ServerConfig(**fields)
        except TypeError as exc:
            raise ConfigurationError(f"{where}: [{name}]: {exc}") from exc
    # Surface alpha/limiter mistakes at load time, not mid-performance.
    cfg.feedback_config()
    return cfg

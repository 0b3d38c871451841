"""Autoregressive mixture-density recurrent network over 9 control channels.

The 9-vector is [dt, c1..c8]: the interval until the next update plus eight
normalized controller values. An LSTM stack feeds a head that parameterizes a
K-component diagonal Gaussian mixture over the next 9-vector. Sampling takes
two temperatures: one sharpens the component choice, the other scales the
component spread. Training is teacher-forced negative log-likelihood with
full backpropagation through time, gradients written out by hand and checked
against finite differences in the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    ConfigurationError,
    FileFormatError,
    NumericalError,
    Rng,
    SizeMismatchError,
)

MODEL_FORMAT_VERSION = 1
VECTOR_DIM = 9  # dt + 8 controls, fixed by the instrument design
LOG_SCALE_MIN = -10.0
LOG_SCALE_MAX = 4.0
WEIGHT_INIT_HALF_RANGE = 0.1
HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


@dataclass
class MdrnnConfig:
    input_dim: int = VECTOR_DIM
    hidden_units: int = 32
    layers: int = 1
    mixtures: int = 5
    dt_min: float = 0.001

    def __post_init__(self):
        if self.input_dim != VECTOR_DIM:
            raise ConfigurationError(f"input_dim is fixed at {VECTOR_DIM} (dt + 8 controls)")
        if self.hidden_units < 1 or self.mixtures < 1 or self.layers < 1:
            raise ConfigurationError("hidden_units, mixtures and layers must be >= 1")
        if self.dt_min <= 0:
            raise ConfigurationError("dt_min must be positive")


def _weight_shapes(cfg: MdrnnConfig) -> dict[str, tuple]:
    h, k = cfg.hidden_units, cfg.mixtures
    shapes: dict[str, tuple] = {}
    for layer in range(cfg.layers):
        in_dim = cfg.input_dim if layer == 0 else h
        shapes[f"wx{layer}"] = (4 * h, in_dim)
        shapes[f"wh{layer}"] = (4 * h, h)
        shapes[f"b{layer}"] = (4 * h,)
    head_dim = k + 2 * k * VECTOR_DIM
    shapes["head_w"] = (head_dim, h)
    shapes["head_b"] = (head_dim,)
    return shapes


@dataclass
class MdrnnModel:
    config: MdrnnConfig
    weights: dict[str, np.ndarray]
    loss_curve: list[float] = field(default_factory=list)


@dataclass
class HiddenState:
    """Per-layer LSTM hidden and cell vectors."""

    h: list[np.ndarray]
    c: list[np.ndarray]


@dataclass
class MixtureParams:
    """K softmax weights plus K x 9 means and log-scales."""

    weights: np.ndarray
    means: np.ndarray
    log_scales: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.log_scales = np.asarray(self.log_scales, dtype=np.float64)
        k = self.weights.size
        if self.means.shape != (k, VECTOR_DIM) or self.log_scales.shape != (k, VECTOR_DIM):
            raise SizeMismatchError("means and log_scales must be (K, 9)")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.means))
                and np.all(np.isfinite(self.log_scales))):
            raise NumericalError("non-finite mixture parameters")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-9 or np.any(self.weights <= 0.0):
            raise NumericalError("mixture weights must be positive and sum to 1")

    @property
    def k(self) -> int:
        return self.weights.size


@dataclass
class GestureSample:
    """One sampled step: the clamped dt plus the raw 9-vector.

    ``controls[0]`` keeps the pre-clamp dt draw; entries 1..8 are the control
    values already clamped to [0, 1]. ``dt`` is what the scheduler uses.
    """

    dt: float
    controls: np.ndarray


def init_state(config: MdrnnConfig) -> HiddenState:
    h = config.hidden_units
    return HiddenState([np.zeros(h) for _ in range(config.layers)],
                       [np.zeros(h) for _ in range(config.layers)])


def init_mdrnn(config: MdrnnConfig, rng: Rng) -> MdrnnModel:
    weights = {
        name: rng.uniform(-WEIGHT_INIT_HALF_RANGE, WEIGHT_INIT_HALF_RANGE, shape)
        for name, shape in _weight_shapes(config).items()
    }
    return MdrnnModel(config, weights)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _softmax(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - np.max(x))
    return e / np.sum(e)


def _split_head(cfg: MdrnnConfig, y: np.ndarray):
    k = cfg.mixtures
    logits = y[:k]
    means = y[k:k + k * VECTOR_DIM].reshape(k, VECTOR_DIM)
    ls_raw = y[k + k * VECTOR_DIM:].reshape(k, VECTOR_DIM)
    return logits, means, ls_raw


def _lstm_forward(model: MdrnnModel, x: np.ndarray, state: HiddenState):
    """One step through the stack; returns (top h, new state, per-layer cache)."""
    cfg = model.config
    hu = cfg.hidden_units
    inp = x
    new_h, new_c, caches = [], [], []
    for layer in range(cfg.layers):
        w = model.weights
        a = w[f"wx{layer}"] @ inp + w[f"wh{layer}"] @ state.h[layer] + w[f"b{layer}"]
        i = _sigmoid(a[:hu])
        f = _sigmoid(a[hu:2 * hu])
        g = np.tanh(a[2 * hu:3 * hu])
        o = _sigmoid(a[3 * hu:])
        c = f * state.c[layer] + i * g
        tc = np.tanh(c)
        hvec = o * tc
        caches.append((inp, state.h[layer], state.c[layer], i, f, g, o, tc))
        new_h.append(hvec)
        new_c.append(c)
        inp = hvec
    return inp, HiddenState(new_h, new_c), caches


def step(model: MdrnnModel, x: np.ndarray,
         state: HiddenState) -> tuple[MixtureParams, HiddenState]:
    """Advance one input vector; deterministic given (input, state)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (VECTOR_DIM,):
        raise SizeMismatchError(f"input must be a {VECTOR_DIM}-vector")
    if not np.all(np.isfinite(x)):
        raise NumericalError("non-finite model input")
    h_top, new_state, _ = _lstm_forward(model, x, state)
    y = model.weights["head_w"] @ h_top + model.weights["head_b"]
    logits, means, ls_raw = _split_head(model.config, y)
    params = MixtureParams(_softmax(logits), means,
                           np.clip(ls_raw, LOG_SCALE_MIN, LOG_SCALE_MAX))
    return params, new_state


def choose_component(weights: np.ndarray, pi_temperature: float, rng: Rng) -> int:
    """Pick a mixture component after sharpening the weights.

    The stored weights are treated as logits via their logs, divided by the
    temperature, and renormalized; temperature -> 0 degenerates to argmax.
    """
    if pi_temperature <= 0:
        raise ConfigurationError("pi_temperature must be > 0")
    logits = np.log(np.maximum(weights, 1e-300)) / pi_temperature
    sharpened = _softmax(logits)
    u = rng.uniform()
    return int(np.searchsorted(np.cumsum(sharpened), u))


def sample(params: MixtureParams, pi_temperature: float, sigma_temperature: float,
           rng: Rng, dt_min: float = 0.001) -> GestureSample:
    """Draw one 9-vector; dt is clamped up to dt_min, controls into [0, 1]."""
    if sigma_temperature <= 0:
        raise ConfigurationError("sigma_temperature must be > 0")
    k = choose_component(params.weights, pi_temperature, rng)
    scales = np.exp(params.log_scales[k]) * sigma_temperature
    draws = params.means[k] + scales * rng.normals(VECTOR_DIM)
    controls = draws.copy()
    controls[1:] = np.clip(controls[1:], 0.0, 1.0)
    return GestureSample(dt=max(float(draws[0]), dt_min), controls=controls)


def nll(params: MixtureParams, target: np.ndarray) -> float:
    """Mixture negative log-likelihood, computed through log-sum-exp."""
    t = np.asarray(target, dtype=np.float64)
    if t.shape != (VECTOR_DIM,):
        raise SizeMismatchError(f"target must be a {VECTOR_DIM}-vector")
    diff = (t[None, :] - params.means) * np.exp(-params.log_scales)
    log_comp = (-0.5 * np.sum(diff**2, axis=1) - np.sum(params.log_scales, axis=1)
                - VECTOR_DIM * HALF_LOG_TWO_PI)
    a = np.log(params.weights) + log_comp
    m = float(np.max(a))
    return -(m + math.log(float(np.sum(np.exp(a - m)))))


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def sequence_loss(model: MdrnnModel,
                  seq: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Teacher-forced mean next-step NLL over one sequence, with gradients.

    Inputs are seq[0..T-2], targets seq[1..T-1]; full BPTT, no truncation.
    """
    cfg = model.config
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[1] != VECTOR_DIM:
        raise SizeMismatchError("sequence must have shape (T, 9)")
    steps = seq.shape[0] - 1
    if steps < 1:
        raise ConfigurationError("sequence must have length >= 2")
    hu, k = cfg.hidden_units, cfg.mixtures
    w = model.weights

    state = init_state(cfg)
    lstm_caches = []   # [t][layer] forward cache
    head_caches = []
    total = 0.0
    for t in range(steps):
        h_top, state, caches = _lstm_forward(model, seq[t], state)
        lstm_caches.append(caches)
        y = w["head_w"] @ h_top + w["head_b"]
        logits, means, ls_raw = _split_head(cfg, y)
        ls = np.clip(ls_raw, LOG_SCALE_MIN, LOG_SCALE_MAX)
        mask = (ls_raw > LOG_SCALE_MIN) & (ls_raw < LOG_SCALE_MAX)
        weights_k = _softmax(logits)
        target = seq[t + 1]
        inv_s = np.exp(-ls)
        diff = (target[None, :] - means) * inv_s
        log_comp = (-0.5 * np.sum(diff**2, axis=1) - np.sum(ls, axis=1)
                    - VECTOR_DIM * HALF_LOG_TWO_PI)
        a = np.log(weights_k) + log_comp
        m = float(np.max(a))
        lse = m + math.log(float(np.sum(np.exp(a - m))))
        total += -lse
        resp = np.exp(a - lse)
        head_caches.append((h_top, weights_k, resp, means, ls, mask, target, inv_s))

    loss = total / steps
    if not np.isfinite(loss):
        raise NumericalError("non-finite sequence loss")

    grads = {name: np.zeros_like(arr) for name, arr in w.items()}
    dh_next = [np.zeros(hu) for _ in range(cfg.layers)]
    dc_next = [np.zeros(hu) for _ in range(cfg.layers)]
    scale = 1.0 / steps
    for t in reversed(range(steps)):
        h_top, weights_k, resp, means, ls, mask, target, inv_s = head_caches[t]
        dlogits = (weights_k - resp) * scale
        delta = (target[None, :] - means) * inv_s**2
        dmeans = -resp[:, None] * delta * scale
        dls = -resp[:, None] * ((target[None, :] - means) ** 2 * inv_s**2 - 1.0) * scale
        dls *= mask
        dy = np.concatenate([dlogits, dmeans.ravel(), dls.ravel()])
        grads["head_w"] += np.outer(dy, h_top)
        grads["head_b"] += dy
        d_above = w["head_w"].T @ dy
        for layer in reversed(range(cfg.layers)):
            inp, h_prev, c_prev, i, f, g, o, tc = lstm_caches[t][layer]
            dh = d_above + dh_next[layer]
            dc = dh * o * (1.0 - tc**2) + dc_next[layer]
            da = np.concatenate([
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dc * i * (1.0 - g**2),
                dh * tc * o * (1.0 - o),
            ])
            grads[f"wx{layer}"] += np.outer(da, inp)
            grads[f"wh{layer}"] += np.outer(da, h_prev)
            grads[f"b{layer}"] += da
            dh_next[layer] = w[f"wh{layer}"].T @ da
            dc_next[layer] = dc * f
            d_above = w[f"wx{layer}"].T @ da
    return loss, grads


def train_mdrnn(config: MdrnnConfig, corpus: list[np.ndarray], epochs: int,
                learning_rate: float, rng: Rng) -> MdrnnModel:
    """Train from scratch; pure function of (config, corpus, seed).

    One Adam step per sequence, sequences visited in corpus order. Per-epoch
    mean NLL lands in model.loss_curve.
    """
    if not corpus:
        raise ConfigurationError("training corpus is empty")
    for seq in corpus:
        arr = np.asarray(seq)
        if arr.ndim != 2 or arr.shape[1] != VECTOR_DIM or arr.shape[0] < 2:
            raise ConfigurationError(
                "every training sequence must be (T, 9) with T >= 2")
    from .optim import Adam

    model = init_mdrnn(config, rng)
    opt = Adam(learning_rate)
    for _ in range(epochs):
        losses = []
        for seq in corpus:
            loss, grads = sequence_loss(model, seq)
            opt.update(model.weights, grads)
            losses.append(loss)
        model.loss_curve.append(float(np.mean(losses)))
    return model


# ---------------------------------------------------------------------------
# Model and corpus files
# ---------------------------------------------------------------------------

def save_mdrnn(model: MdrnnModel, path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": {
            "input_dim": model.config.input_dim,
            "hidden_units": model.config.hidden_units,
            "layers": model.config.layers,
            "mixtures": model.config.mixtures,
            "dt_min": model.config.dt_min,
        },
        "weights": {k: v.tolist() for k, v in model.weights.items()},
    }
    Path(path).write_text(json.dumps(doc))


def load_mdrnn(path) -> MdrnnModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise FileFormatError(
            f"{path}: unsupported model format_version {doc.get('format_version')!r}")
    config = MdrnnConfig(**doc["config"])
    weights = {}
    for name, shape in _weight_shapes(config).items():
        arr = np.asarray(doc["weights"][name], dtype=np.float64)
        if arr.shape != shape:
            raise SizeMismatchError(f"weight block '{name}' has shape {arr.shape}, want {shape}")
        weights[name] = arr
    return MdrnnModel(config, weights)


def save_gesture_corpus(path, corpus: list[np.ndarray]) -> None:
    with open(path, "w") as fh:
        for seq in corpus:
            fh.write(json.dumps(np.asarray(seq).tolist()))
            fh.write("\n")


def load_gesture_corpus(path) -> list[np.ndarray]:
    corpus = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FileFormatError(f"{path}:{line_no}: not valid JSON: {exc}") from exc
            arr = np.asarray(rows, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != VECTOR_DIM:
                raise FileFormatError(
                    f"{path}:{line_no}: sequence must be a list of {VECTOR_DIM}-vectors")
            corpus.append(arr)
    return corpus

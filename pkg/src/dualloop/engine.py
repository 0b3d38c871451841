"""Offline drivers: scripted interaction sessions and offline audio renders.

Both run on the simulated clock with the same state machines the live mode
uses, so a test or a render exercises production code paths. Given a seed,
both are bit-reproducible; session logs and traces serialize with a fixed
field order so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .codec import CodecModel
from .core import Clock, ControlEvent, FileFormatError, Rng, Source
from .feedback import (
    FeedbackConfig,
    FeedbackState,
    Manipulation,
    Offset,
    Override,
    process_window,
)
from .interaction import InteractionConfig, InteractionEngine
from .mdrnn import MdrnnModel


# ---------------------------------------------------------------------------
# Scripted sessions
# ---------------------------------------------------------------------------

def load_user_script(path) -> list[ControlEvent]:
    """JSONL of {"t": seconds, "channel": 0..7, "value": 0..1} human events."""
    events = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                events.append(ControlEvent(float(obj["t"]), int(obj["channel"]),
                                           float(obj["value"]), Source.HUMAN))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise FileFormatError(f"{path}:{line_no}: bad script line: {exc}") from exc
    return events


def run_simulation(model: MdrnnModel, config: InteractionConfig,
                   script: list[ControlEvent], duration: float,
                   seed: int) -> list[dict]:
    """Feed scripted human events and ticks through the interaction machine.

    Events and ticks merge into one stream ordered by (time, human first);
    returns the full session log, header included.
    """
    engine = InteractionEngine(model, config, Rng(seed))
    engine.log.append({"kind": "header", "seed": seed, "tick": config.tick,
                       "switchover": config.switchover})
    script = sorted(script, key=lambda ev: ev.time)
    clock = Clock(tick=config.tick)
    total_steps = int(round(duration / config.tick))
    next_ev = 0
    for step in range(total_steps + 1):
        clock.steps = step
        while next_ev < len(script) and script[next_ev].time <= clock.now:
            engine.on_user_event(script[next_ev], clock)
            next_ev += 1
        engine.tick(clock)
    return engine.log


def write_session_log(path, entries: list[dict]) -> None:
    with open(path, "w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Offline rendering
# ---------------------------------------------------------------------------

@dataclass
class AutomationEvent:
    time: float
    param: str       # gain | alpha | offset | override | clear
    dim: int | None
    value: float | None


def load_automation(path) -> list[AutomationEvent]:
    """JSONL of timestamped feedback-parameter changes.

    {"t": 0.5, "param": "gain", "value": 0.8}
    {"t": 1.0, "param": "alpha", "dim": 2, "value": 0.9}   dim omitted = all dims
    {"t": 2.0, "param": "offset", "dim": 1, "value": -0.5}
    {"t": 2.5, "param": "override", "dim": 0, "value": 1.2}
    {"t": 3.0, "param": "clear", "dim": 0}                 dim omitted = clear all
    """
    events = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                param = obj["param"]
                if param not in ("gain", "alpha", "offset", "override", "clear"):
                    raise ValueError(f"unknown param {param!r}")
                events.append(AutomationEvent(
                    time=float(obj["t"]),
                    param=param,
                    dim=int(obj["dim"]) if obj.get("dim") is not None else None,
                    value=float(obj["value"]) if obj.get("value") is not None else None,
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FileFormatError(f"{path}:{line_no}: bad automation line: {exc}") from exc
    return sorted(events, key=lambda e: e.time)


def _apply_automation(ev: AutomationEvent, fb: FeedbackConfig,
                      manip: Manipulation) -> None:
    if ev.param == "gain":
        fb.audio_gain = float(ev.value)
    elif ev.param == "alpha":
        if ev.dim is None:
            fb.alpha[:] = ev.value
        else:
            fb.alpha[ev.dim] = ev.value
    elif ev.param == "offset":
        manip.set(ev.dim, Offset(ev.value))
    elif ev.param == "override":
        manip.set(ev.dim, Override(ev.value))
    elif ev.param == "clear":
        manip.clear(ev.dim)


def render_stream(model: CodecModel, fb: FeedbackConfig, windows,
                  automation: list[AutomationEvent], rng: Rng):
    """Run windows through the feedback pipeline, applying automation changes
    at window boundaries. Returns (output windows, per-window latent traces)."""
    state = FeedbackState()
    manip = Manipulation()
    out_windows, traces = [], []
    hop_seconds = model.config.hop / model.config.sample_rate
    next_auto = 0
    for i, win in enumerate(windows):
        t_start = i * hop_seconds
        while next_auto < len(automation) and automation[next_auto].time <= t_start:
            _apply_automation(automation[next_auto], fb, manip)
            next_auto += 1
        out, state, trace = process_window(model, fb, state, win, manip, rng)
        out_windows.append(out)
        traces.append(trace)
    return out_windows, traces

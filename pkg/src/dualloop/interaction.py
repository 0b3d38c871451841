"""Call-and-response loop between a human performer and the gesture model.

The human leads while they keep playing. Once no human event has arrived for
the switchover interval (0.1 s by default), the model takes the lead: it
samples its own next update time and control values, emits them on all eight
channels, feeds the emitted vector back into itself, and keeps going until a
human event interrupts and reclaims the lead.

Idle time is measured from the last human event only - the model's own output
never postpones its interruption by a returning performer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import mdrnn
from .core import (
    Clock,
    ConfigurationError,
    ControlEvent,
    NUM_CONTROL_CHANNELS,
    OrderingError,
    Rng,
    Source,
)
from .mdrnn import GestureSample, HiddenState, MdrnnModel, MixtureParams, VECTOR_DIM


class LoopMode(enum.Enum):
    USER_LEAD = "user"
    MODEL_LEAD = "model"


@dataclass
class InteractionConfig:
    switchover: float = 0.1     # seconds of human silence before the model leads
    pi_temperature: float = 1.0
    sigma_temperature: float = 1.0
    max_model_rate: float = 100.0  # events/second cap on model output
    tick: float = 0.01

    def __post_init__(self):
        if self.switchover <= 0:
            raise ConfigurationError("switchover must be positive")
        if self.pi_temperature <= 0 or self.sigma_temperature <= 0:
            raise ConfigurationError("temperatures must be positive")
        if self.max_model_rate <= 0:
            raise ConfigurationError("max_model_rate must be positive")
        if self.tick <= 0:
            raise ConfigurationError("tick must be positive")


@dataclass
class PendingEvent:
    due_time: float
    vector: np.ndarray  # the 9-vector [dt, c1..c8] to emit and feed back


@dataclass
class InteractionState:
    mode: LoopMode
    last_user_time: float
    rnn_state: HiddenState
    last_vector: np.ndarray
    last_event_time: float = 0.0
    last_params: Optional[MixtureParams] = None
    pending: Optional[PendingEvent] = None


def initial_state(model: MdrnnModel) -> InteractionState:
    return InteractionState(
        mode=LoopMode.USER_LEAD,
        last_user_time=0.0,
        rnn_state=mdrnn.init_state(model.config),
        last_vector=np.zeros(VECTOR_DIM),
    )


class InteractionEngine:
    """Drives one model through user events and clock ticks.

    Single-threaded: callers must merge human events and ticks into one
    stream ordered by (time, human-before-tick) before feeding it here.
    """

    def __init__(self, model: MdrnnModel, config: InteractionConfig, rng: Rng):
        self.model = model
        self.config = config
        self.rng = rng
        self.state = initial_state(model)
        self.log: list[dict] = []

    # -- helpers ----------------------------------------------------------

    def _advance_model(self, vector: np.ndarray, event_time: float) -> None:
        params, rnn_state = mdrnn.step(self.model, vector, self.state.rnn_state)
        self.state.rnn_state = rnn_state
        self.state.last_params = params
        self.state.last_vector = vector
        self.state.last_event_time = event_time

    def _sample_next(self, from_time: float) -> PendingEvent:
        if self.state.last_params is None:
            # Nothing has ever been fed; prime the net with the zero vector.
            self._advance_model(np.zeros(VECTOR_DIM), from_time)
        gesture: GestureSample = mdrnn.sample(
            self.state.last_params, self.config.pi_temperature,
            self.config.sigma_temperature, self.rng, self.model.config.dt_min)
        dt = max(gesture.dt, 1.0 / self.config.max_model_rate)
        vector = gesture.controls.copy()
        vector[0] = dt
        return PendingEvent(due_time=from_time + dt, vector=vector)

    def _set_mode(self, mode: LoopMode, t: float) -> None:
        if self.state.mode is not mode:
            self.state.mode = mode
            self.log.append({"t": t, "kind": "mode", "mode": mode.value})

    # -- the two entry points ---------------------------------------------

    def on_user_event(self, ev: ControlEvent, clock: Clock) -> list[ControlEvent]:
        """Human input: reclaim the lead, advance the net, pass the event on."""
        assert ev.source is Source.HUMAN
        if ev.time < self.state.last_user_time:
            raise OrderingError(
                f"user event at {ev.time} is earlier than {self.state.last_user_time}")
        self._set_mode(LoopMode.USER_LEAD, ev.time)
        self.state.pending = None
        self.state.last_user_time = ev.time

        dt = ev.time - self.state.last_event_time
        controls = self.state.last_vector[1:].copy()
        controls[ev.channel] = ev.value
        vector = np.concatenate([[dt], controls])
        self._advance_model(vector, ev.time)

        self.log.append({"t": ev.time, "kind": "user",
                         "channel": ev.channel, "value": ev.value})
        return [ev]

    def tick(self, clock: Clock) -> list[ControlEvent]:
        """One engine tick: handle switchover, then any due model events."""
        outputs: list[ControlEvent] = []
        st = self.state
        if (st.mode is LoopMode.USER_LEAD
                and clock.now - st.last_user_time >= self.config.switchover):
            self._set_mode(LoopMode.MODEL_LEAD, clock.now)
            st.pending = self._sample_next(clock.now)

        while (st.mode is LoopMode.MODEL_LEAD and st.pending is not None
               and st.pending.due_time <= clock.now):
            due = st.pending
            for ch in range(NUM_CONTROL_CHANNELS):
                ev = ControlEvent(time=due.due_time, channel=ch,
                                  value=float(due.vector[1 + ch]), source=Source.MODEL)
                outputs.append(ev)
                self.log.append({"t": due.due_time, "kind": "model",
                                 "channel": ch, "value": float(due.vector[1 + ch])})
            # Close the loop: what was emitted becomes the next model input.
            self._advance_model(due.vector, due.due_time)
            st.pending = self._sample_next(due.due_time)
        return outputs

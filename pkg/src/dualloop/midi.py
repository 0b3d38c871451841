"""Bit-exact 3-byte MIDI message codec and the dual-interface control mapping.

Model channel 0 plays notes on the synth; channels 1..7 drive seven timbral
CCs; all eight channels are mirrored to the touch-pad's LED sliders. No
running status, no SysEx.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .core import (
    Clock,
    ControlEvent,
    FramingError,
    NUM_CONTROL_CHANNELS,
    RangeError,
    Source,
    UnsupportedMessageError,
)


class MidiKind(enum.Enum):
    NOTE_ON = 0x9
    NOTE_OFF = 0x8
    CONTROL_CHANGE = 0xB


@dataclass(frozen=True)
class MidiMessage:
    kind: MidiKind
    channel: int
    data1: int
    data2: int

    def __post_init__(self):
        if not (0 <= self.channel <= 15):
            raise RangeError(f"MIDI channel {self.channel} outside 0..15")
        for name, v in (("data1", self.data1), ("data2", self.data2)):
            if not (0 <= v <= 127):
                raise RangeError(f"MIDI {name} {v} outside 0..127")


def midi_encode(msg: MidiMessage) -> bytes:
    return bytes([(msg.kind.value << 4) | msg.channel, msg.data1, msg.data2])


def midi_decode(data: bytes) -> MidiMessage:
    if len(data) < 3:
        raise FramingError(f"need 3 bytes, got {len(data)}")
    status = data[0]
    kind_nibble = status >> 4
    try:
        kind = MidiKind(kind_nibble)
    except ValueError:
        raise UnsupportedMessageError(status) from None
    if data[1] > 127 or data[2] > 127:
        raise FramingError("data byte has high bit set")
    return MidiMessage(kind, status & 0x0F, data[1], data[2])


def iter_midi_stream(data: bytes):
    """Decode a stream of back-to-back 3-byte messages."""
    if len(data) % 3:
        raise FramingError(f"stream length {len(data)} is not a multiple of 3")
    for i in range(0, len(data), 3):
        yield midi_decode(data[i:i + 3])


def scale_to_midi(value: float) -> int:
    """[0, 1] -> 0..127 with half-up rounding (0.5 always rounds away from 0)."""
    return min(127, int(math.floor(value * 127.0 + 0.5)))


# Defaults: CC 71..77 are the MIDI sound-controller block, a natural home for
# seven timbre knobs; 102..109 sit in the undefined block, free for the pad.
DEFAULT_TIMBRE_CCS = (71, 72, 73, 74, 75, 76, 77)
DEFAULT_PAD_CCS = (102, 103, 104, 105, 106, 107, 108, 109)


@dataclass
class MappingTable:
    """How the eight model channels land on the two hardware-stand-in ports.

    Channel 0 becomes a note; channels 1..7 become the seven timbre CCs; every
    channel is additionally mirrored to one pad slider CC.
    """

    synth_midi_channel: int = 0
    pad_midi_channel: int = 1
    note_velocity: int = 100
    timbre_ccs: tuple = DEFAULT_TIMBRE_CCS
    pad_ccs: tuple = DEFAULT_PAD_CCS

    def __post_init__(self):
        if len(self.timbre_ccs) != NUM_CONTROL_CHANNELS - 1:
            raise RangeError("need exactly 7 timbre CC numbers")
        if len(self.pad_ccs) != NUM_CONTROL_CHANNELS:
            raise RangeError("need exactly 8 pad slider CC numbers")


def route_out(ev: ControlEvent, table: MappingTable) -> list[MidiMessage]:
    """One synth-facing message plus its pad-slider mirror."""
    v = scale_to_midi(ev.value)
    if ev.channel == 0:
        synth = MidiMessage(MidiKind.NOTE_ON, table.synth_midi_channel,
                            v, table.note_velocity)
    else:
        synth = MidiMessage(MidiKind.CONTROL_CHANGE, table.synth_midi_channel,
                            table.timbre_ccs[ev.channel - 1], v)
    pad = MidiMessage(MidiKind.CONTROL_CHANGE, table.pad_midi_channel,
                      table.pad_ccs[ev.channel], v)
    return [synth, pad]


def route_in(msg: MidiMessage, table: MappingTable,
             clock: Clock) -> Optional[ControlEvent]:
    """Map an incoming message back to a human control event, if it maps at all."""
    if msg.kind is MidiKind.NOTE_ON and msg.channel == table.synth_midi_channel:
        return ControlEvent(clock.now, 0, msg.data1 / 127.0, Source.HUMAN)
    if msg.kind is MidiKind.CONTROL_CHANGE:
        if msg.channel == table.synth_midi_channel and msg.data1 in table.timbre_ccs:
            ch = 1 + table.timbre_ccs.index(msg.data1)
            return ControlEvent(clock.now, ch, msg.data2 / 127.0, Source.HUMAN)
        if msg.channel == table.pad_midi_channel and msg.data1 in table.pad_ccs:
            ch = table.pad_ccs.index(msg.data1)
            return ControlEvent(clock.now, ch, msg.data2 / 127.0, Source.HUMAN)
    return None


# ---------------------------------------------------------------------------
# Virtual ports: identical byte streams, file-backed so CI needs no hardware
# ---------------------------------------------------------------------------

class FileMidiOut:
    """Appends raw message bytes to a file, one flush per message."""

    def __init__(self, path):
        self._fh = open(path, "ab")

    def send(self, msg: MidiMessage) -> None:
        self._fh.write(midi_encode(msg))
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


class FileMidiIn:
    """Polls a growing file for complete 3-byte messages."""

    def __init__(self, path):
        self.path = path
        self._offset = 0

    def poll(self) -> list[MidiMessage]:
        try:
            with open(self.path, "rb") as fh:
                fh.seek(self._offset)
                data = fh.read()
        except FileNotFoundError:
            return []
        usable = len(data) - (len(data) % 3)
        self._offset += usable
        return list(iter_midi_stream(data[:usable]))


class NullMidiOut:
    def send(self, msg: MidiMessage) -> None:
        pass

    def close(self) -> None:
        pass

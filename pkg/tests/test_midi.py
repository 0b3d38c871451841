import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualloop.core import (
    Clock,
    ControlEvent,
    FramingError,
    Source,
    UnsupportedMessageError,
)
from dualloop.midi import (
    FileMidiIn,
    FileMidiOut,
    MappingTable,
    MidiKind,
    MidiMessage,
    iter_midi_stream,
    midi_decode,
    midi_encode,
    route_in,
    route_out,
    scale_to_midi,
)


class TestWireFormat:
    def test_control_change_bytes(self):
        msg = MidiMessage(MidiKind.CONTROL_CHANGE, 0, 7, 100)
        assert midi_encode(msg) == bytes([0xB0, 0x07, 0x64])

    def test_note_on_bytes(self):
        msg = MidiMessage(MidiKind.NOTE_ON, 1, 60, 0)
        assert midi_encode(msg) == bytes([0x91, 0x3C, 0x00])

    def test_note_off_bytes(self):
        msg = MidiMessage(MidiKind.NOTE_OFF, 15, 127, 64)
        assert midi_encode(msg) == bytes([0x8F, 0x7F, 0x40])

    @given(st.sampled_from(list(MidiKind)), st.integers(0, 15),
           st.integers(0, 127), st.integers(0, 127))
    def test_round_trip_identity(self, kind, channel, d1, d2):
        msg = MidiMessage(kind, channel, d1, d2)
        assert midi_decode(midi_encode(msg)) == msg

    def test_unsupported_status_carries_byte(self):
        with pytest.raises(UnsupportedMessageError) as exc:
            midi_decode(bytes([0xE0, 0x00, 0x40]))  # pitch bend
        assert exc.value.status_byte == 0xE0

    def test_truncated_input(self):
        with pytest.raises(FramingError):
            midi_decode(bytes([0x90, 0x3C]))

    def test_stream_length_must_be_multiple_of_three(self):
        with pytest.raises(FramingError):
            list(iter_midi_stream(bytes([0x90, 0x3C, 0x40, 0xB0])))


class TestScaling:
    def test_half_up_rounding(self):
        assert scale_to_midi(0.5) == 64      # 63.5 rounds up
        assert scale_to_midi(0.0) == 0
        assert scale_to_midi(1.0) == 127

    def test_half_up_on_even_floor(self):
        # 62.5/127: half-up gives 63 where banker's rounding would give 62.
        assert scale_to_midi(62.5 / 127.0) == 63


class TestRouting:
    table = MappingTable()

    def ev(self, channel, value, source=Source.MODEL):
        return ControlEvent(1.0, channel, value, source)

    def test_channel_zero_is_a_note(self):
        synth, pad = route_out(self.ev(0, 1.0), self.table)
        assert synth.kind is MidiKind.NOTE_ON
        assert synth.data1 == 127
        assert synth.data2 == 100  # fixed velocity
        assert pad.kind is MidiKind.CONTROL_CHANGE

    def test_timbre_channel_bottom_of_range(self):
        synth, pad = route_out(self.ev(3, 0.0), self.table)
        assert synth.kind is MidiKind.CONTROL_CHANGE
        assert synth.data2 == 0
        assert pad.data1 == self.table.pad_ccs[3]
        assert pad.data2 == 0

    def test_midscale_value_rounds_half_up(self):
        synth, _ = route_out(self.ev(2, 0.5), self.table)
        assert synth.data2 == 64

    def test_structural_coverage(self):
        # 1 note + 7 timbre CCs on the synth; every channel mirrored to a pad CC.
        synth_kinds, pad_ccs = [], []
        for ch in range(8):
            synth, pad = route_out(self.ev(ch, 0.5), self.table)
            synth_kinds.append(synth.kind)
            pad_ccs.append(pad.data1)
        assert synth_kinds[0] is MidiKind.NOTE_ON
        assert all(k is MidiKind.CONTROL_CHANGE for k in synth_kinds[1:])
        assert len(set(pad_ccs)) == 8

    @given(st.integers(0, 7), st.floats(0.0, 1.0))
    def test_route_in_recovers_channel_and_value(self, channel, value):
        clock = Clock()
        synth, pad = route_out(self.ev(channel, value), self.table)
        for msg in (synth, pad):
            back = route_in(msg, self.table, clock)
            assert back is not None
            assert back.channel == channel
            assert abs(back.value - value) <= 1.0 / 127.0
            assert back.source is Source.HUMAN

    def test_unmapped_messages_ignored(self):
        clock = Clock()
        note_off = MidiMessage(MidiKind.NOTE_OFF, 0, 60, 0)
        assert route_in(note_off, self.table, clock) is None
        stray_cc = MidiMessage(MidiKind.CONTROL_CHANGE, 5, 1, 64)
        assert route_in(stray_cc, self.table, clock) is None


class TestFilePorts:
    def test_bytes_round_trip_through_file(self, tmp_path):
        path = tmp_path / "port.midi"
        out = FileMidiOut(path)
        sent = [MidiMessage(MidiKind.NOTE_ON, 0, 60, 100),
                MidiMessage(MidiKind.CONTROL_CHANGE, 1, 74, 15)]
        for msg in sent:
            out.send(msg)
        out.close()
        received = FileMidiIn(path).poll()
        assert received == sent

    def test_poll_only_returns_new_messages(self, tmp_path):
        path = tmp_path / "port.midi"
        out = FileMidiOut(path)
        port = FileMidiIn(path)
        out.send(MidiMessage(MidiKind.NOTE_ON, 0, 1, 2))
        assert len(port.poll()) == 1
        assert port.poll() == []
        out.send(MidiMessage(MidiKind.NOTE_ON, 0, 3, 4))
        assert len(port.poll()) == 1
        out.close()

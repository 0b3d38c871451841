"""Windowed 16-bit PCM mono WAV reading and writing."""

from __future__ import annotations

import wave

import numpy as np

from .core import AudioWindow, FileFormatError


def wav_write(path, windows: list[AudioWindow], sample_rate: int) -> None:
    """Concatenate windows and write them as 16-bit little-endian mono PCM."""
    samples = (np.concatenate([w.samples for w in windows])
               if windows else np.zeros(0))
    ints = np.floor(samples * 32768.0 + 0.5).astype(np.int64)
    ints = np.clip(ints, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(ints.tobytes())


def wav_read(path, window_size: int) -> list[AudioWindow]:
    """Read a mono 16-bit PCM file into fixed-size windows.

    The final window is zero-padded up to window_size; its ``padding`` field
    records how many tail samples are fill rather than signal.
    """
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1:
            raise FileFormatError(f"{path}: expected mono, got {fh.getnchannels()} channels")
        if fh.getsampwidth() != 2:
            raise FileFormatError(
                f"{path}: expected 16-bit PCM, got {8 * fh.getsampwidth()}-bit")
        if fh.getcomptype() != "NONE":
            raise FileFormatError(f"{path}: compressed WAV ({fh.getcomptype()}) not supported")
        sample_rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0

    windows = []
    for idx, start in enumerate(range(0, samples.size, window_size)):
        chunk = samples[start:start + window_size]
        pad = window_size - chunk.size
        if pad:
            chunk = np.concatenate([chunk, np.zeros(pad)])
        windows.append(AudioWindow(chunk, sample_rate, index=idx, padding=pad))
    return windows

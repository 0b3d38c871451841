#!/usr/bin/env python3
"""Generate the synthetic training corpora (sine-mixture WAV + gesture JSONL)."""

import argparse
from pathlib import Path

from dualloop.codec import CodecConfig
from dualloop.core import Rng
from dualloop.mdrnn import save_gesture_corpus
from dualloop.synthetic import make_gesture_corpus, make_sine_corpus
from dualloop.wavefile import wav_write


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="runs")
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--windows", type=int, default=64)
    ap.add_argument("--sequences", type=int, default=16)
    ap.add_argument("--length", type=int, default=32)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = Rng(args.seed)

    cfg = CodecConfig()
    windows = make_sine_corpus(cfg, args.windows, rng.fork())
    wav_path = out / "sine_corpus.wav"
    wav_write(wav_path, windows, cfg.sample_rate)
    print(f"{wav_path}: {args.windows} windows of {cfg.window_size} samples")

    corpus = make_gesture_corpus(args.sequences, args.length, rng.fork())
    jsonl_path = out / "gesture_corpus.jsonl"
    save_gesture_corpus(jsonl_path, corpus)
    print(f"{jsonl_path}: {args.sequences} sequences of {args.length} steps")


if __name__ == "__main__":
    main()

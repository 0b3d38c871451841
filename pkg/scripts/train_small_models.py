#!/usr/bin/env python3
"""Train desk-scale models on the synthetic corpora and save them to runs/.

Small enough to finish in a couple of minutes on a laptop CPU; the resulting
model paths can be dropped into the [codec]/[mdrnn] config sections.
"""

import argparse
import time
from pathlib import Path

from dualloop.codec import CodecConfig, save_codec, train_codec
from dualloop.core import Rng
from dualloop.mdrnn import MdrnnConfig, save_mdrnn, train_mdrnn
from dualloop.synthetic import make_gesture_corpus, make_sine_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="runs")
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--epochs", type=int, default=200)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    codec_cfg = CodecConfig(window_size=128, hop=128, latent_dims=8,
                            hidden_units=32, sample_rate=16000)
    corpus = make_sine_corpus(codec_cfg, 32, Rng(args.seed))
    t0 = time.time()
    model = train_codec(codec_cfg, corpus, args.epochs, 0.001, Rng(args.seed))
    print(f"codec: loss {model.loss_curve[0]:.5f} -> {model.loss_curve[-1]:.5f} "
          f"({time.time() - t0:.1f}s)")
    save_codec(model, out / "codec.json")

    mdrnn_cfg = MdrnnConfig(hidden_units=16, mixtures=3)
    gestures = make_gesture_corpus(8, 24, Rng(args.seed + 1))
    t0 = time.time()
    gmodel = train_mdrnn(mdrnn_cfg, gestures, args.epochs, 0.002, Rng(args.seed + 1))
    print(f"mdrnn: nll {gmodel.loss_curve[0]:.4f} -> {gmodel.loss_curve[-1]:.4f} "
          f"({time.time() - t0:.1f}s)")
    save_mdrnn(gmodel, out / "mdrnn.json")


if __name__ == "__main__":
    main()

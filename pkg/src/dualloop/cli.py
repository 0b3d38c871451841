"""Operator entry point: train models, render offline, replay scripted
sessions, verify gradients, and run the live engine.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import codec as codec_mod
from . import gradcheck as gradcheck_mod
from . import mdrnn as mdrnn_mod
from .config import EngineConfig, load_config
from .core import ConfigurationError, NumericalError, Rng, fresh_seed
from .engine import (
    load_automation,
    load_user_script,
    render_stream,
    run_simulation,
    write_session_log,
)
from .feedback import write_trace_csv
from .wavefile import wav_read, wav_write

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _resolve_seed(args_seed, config: EngineConfig) -> int:
    if args_seed is not None:
        return args_seed
    if config.seed is not None:
        return config.seed
    seed = fresh_seed()
    print(f"no seed given; picked {seed} from OS entropy", file=sys.stderr)
    return seed


def _write_curve_csv(path, curve: list[float]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for i, loss in enumerate(curve):
            writer.writerow([i, repr(loss)])


def cmd_train_codec(args) -> int:
    config = load_config(args.config)
    seed = _resolve_seed(args.seed, config)
    windows = wav_read(args.corpus, config.codec.window_size)
    if not windows:
        raise ConfigurationError(f"{args.corpus}: no audio")
    settings = config.codec_train
    model = codec_mod.train_codec(config.codec, windows, settings.epochs,
                                  settings.learning_rate, Rng(seed))
    codec_mod.save_codec(model, args.out)
    curve_path = Path(args.out).with_suffix(".curve.csv")
    _write_curve_csv(curve_path, model.loss_curve)
    if model.loss_curve:
        print(f"trained {settings.epochs} epochs: "
              f"loss {model.loss_curve[0]:.6f} -> {model.loss_curve[-1]:.6f}")
    print(f"model: {args.out}\ncurve: {curve_path}\nseed: {seed}")
    return EXIT_OK


def cmd_train_mdrnn(args) -> int:
    config = load_config(args.config)
    seed = _resolve_seed(args.seed, config)
    corpus = mdrnn_mod.load_gesture_corpus(args.corpus)
    settings = config.mdrnn_train
    model = mdrnn_mod.train_mdrnn(config.mdrnn, corpus, settings.epochs,
                                  settings.learning_rate, Rng(seed))
    mdrnn_mod.save_mdrnn(model, args.out)
    curve_path = Path(args.out).with_suffix(".curve.csv")
    _write_curve_csv(curve_path, model.loss_curve)
    if model.loss_curve:
        print(f"trained {settings.epochs} epochs: "
              f"nll {model.loss_curve[0]:.6f} -> {model.loss_curve[-1]:.6f}")
    print(f"model: {args.out}\ncurve: {curve_path}\nseed: {seed}")
    return EXIT_OK


def _load_or_init_codec(config: EngineConfig, seed: int):
    if config.codec_model:
        return codec_mod.load_codec(config.codec_model)
    return codec_mod.init_codec(config.codec, Rng(seed))


def _load_or_init_mdrnn(config: EngineConfig, seed: int):
    if config.mdrnn_model:
        return mdrnn_mod.load_mdrnn(config.mdrnn_model)
    return mdrnn_mod.init_mdrnn(config.mdrnn, Rng(seed))


def cmd_render(args) -> int:
    config = load_config(args.config)
    seed = _resolve_seed(args.seed, config)
    model = _load_or_init_codec(config, seed)
    fb = config.feedback.build(model.config.latent_dims)
    windows = wav_read(args.input, model.config.window_size)
    automation = load_automation(args.automation) if args.automation else []
    outs, traces = render_stream(model, fb, windows, automation, Rng(seed))
    wav_write(args.out, outs, model.config.sample_rate)
    trace_path = Path(args.out).with_suffix(".trace.csv")
    write_trace_csv(trace_path, traces)
    print(f"rendered {len(outs)} windows\naudio: {args.out}\n"
          f"trace: {trace_path}\nseed: {seed}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    seed = _resolve_seed(args.seed, config)
    model = _load_or_init_mdrnn(config, seed)
    script = load_user_script(args.script)
    log = run_simulation(model, config.interaction, script, args.duration, seed)
    write_session_log(args.out, log)
    n_model = sum(1 for e in log if e.get("kind") == "model")
    n_user = sum(1 for e in log if e.get("kind") == "user")
    print(f"simulated {args.duration}s: {n_user} user events, "
          f"{n_model} model events\nlog: {args.out}\nseed: {seed}")
    return EXIT_OK


def cmd_run(args) -> int:
    from .server import run_live

    config = load_config(args.config)
    seed = _resolve_seed(args.seed, config)
    run_live(config, seed, max_seconds=args.max_seconds)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    results = gradcheck_mod.run_all(args.seed if args.seed is not None else 7)
    ok = True
    for name, err in results.items():
        passed = err < gradcheck_mod.REL_TOLERANCE
        ok = ok and passed
        print(f"{name}: max relative error {err:.3e} "
              f"{'ok' if passed else 'FAIL'} (tolerance {gradcheck_mod.REL_TOLERANCE})")
    if not ok:
        raise NumericalError("gradient check failed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualloop",
        description="Latent-feedback synthesis engine and control-loop instrument.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--config", required=name != "gradcheck",
                       help="TOML config file")
        p.add_argument("--seed", type=int, default=None)
        return p

    p = add("train-codec", cmd_train_codec, help="train the audio autoencoder")
    p.add_argument("--corpus", required=True, help="mono 16-bit WAV")
    p.add_argument("--out", required=True, help="model JSON path")

    p = add("train-mdrnn", cmd_train_mdrnn, help="train the gesture model")
    p.add_argument("--corpus", required=True, help="JSONL, one sequence per line")
    p.add_argument("--out", required=True, help="model JSON path")

    p = add("run", cmd_run, help="run the live engine (MIDI, audio, web UI)")
    p.add_argument("--max-seconds", type=float, default=None,
                   help="stop after this long (default: run until interrupted)")

    p = add("render", cmd_render, help="render audio offline through the feedback pipeline")
    p.add_argument("--input", required=True, help="input WAV")
    p.add_argument("--automation", default=None, help="JSONL parameter changes")
    p.add_argument("--out", required=True, help="output WAV path")

    p = add("simulate", cmd_simulate, help="replay a scripted session deterministically")
    p.add_argument("--script", required=True, help="JSONL user events")
    p.add_argument("--out", required=True, help="session log path")
    p.add_argument("--duration", type=float, default=2.0)

    add("gradcheck", cmd_gradcheck, help="verify gradients against finite differences")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

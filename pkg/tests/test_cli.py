import json
from pathlib import Path

import numpy as np
import pytest

from dualloop.cli import main
from dualloop.codec import CodecConfig, decode, encode, init_codec, load_codec
from dualloop.core import LatentVector, Rng
from dualloop.mdrnn import load_mdrnn, save_gesture_corpus
from dualloop.synthetic import make_gesture_corpus, make_sine_corpus
from dualloop.wavefile import wav_read, wav_write

TINY_TOML = """
[codec]
window_size = 16
hop = 16
latent_dims = 3
hidden_units = 4
epochs = 5
learning_rate = 0.003

[feedback]
alpha = 0.0
gain = 0.0
limiter = "hardclip"
deterministic_latent = true

[mdrnn]
hidden_units = 8
mixtures = 2
epochs = 3
learning_rate = 0.005
"""


@pytest.fixture
def tiny(tmp_path):
    config = tmp_path / "engine.toml"
    config.write_text(TINY_TOML)
    cfg = CodecConfig(window_size=16, hop=16, latent_dims=3, hidden_units=4)
    corpus = make_sine_corpus(cfg, 6, Rng(50))
    wav = tmp_path / "corpus.wav"
    wav_write(wav, corpus, cfg.sample_rate)
    return tmp_path, config, cfg, wav


class TestTrainCommands:
    def test_train_codec_writes_model_and_curve(self, tiny):
        tmp, config, cfg, wav = tiny
        out = tmp / "codec.json"
        code = main(["train-codec", "--config", str(config), "--corpus", str(wav),
                     "--out", str(out), "--seed", "9"])
        assert code == 0
        model = load_codec(out)
        assert model.config.window_size == 16
        curve = (tmp / "codec.curve.csv").read_text().strip().splitlines()
        assert curve[0] == "epoch,loss"
        assert len(curve) == 6  # header + 5 epochs

    def test_train_mdrnn_writes_model_and_curve(self, tiny, tmp_path):
        tmp, config, _, _ = tiny
        corpus_path = tmp / "gestures.jsonl"
        save_gesture_corpus(corpus_path, make_gesture_corpus(3, 6, Rng(51)))
        out = tmp / "mdrnn.json"
        code = main(["train-mdrnn", "--config", str(config), "--corpus",
                     str(corpus_path), "--out", str(out), "--seed", "9"])
        assert code == 0
        assert load_mdrnn(out).config.mixtures == 2
        assert (tmp / "mdrnn.curve.csv").exists()


class TestRender:
    def test_collapse_matches_plain_autoencoding(self, tiny):
        # alpha=0, gain=0, hardclip, deterministic: render == encode/decode.
        tmp, config, cfg, wav = tiny
        out = tmp / "out.wav"
        assert main(["render", "--config", str(config), "--input", str(wav),
                     "--out", str(out), "--seed", "12"]) == 0

        model = init_codec(cfg, Rng(12))
        plain = [decode(model, LatentVector(encode(model, w).mean), index=w.index)
                 for w in wav_read(wav, 16)]
        plain_path = tmp / "plain.wav"
        wav_write(plain_path, plain, cfg.sample_rate)
        assert out.read_bytes() == plain_path.read_bytes()

    def test_trace_csv_has_index_means_and_log_scales(self, tiny):
        tmp, config, cfg, wav = tiny
        out = tmp / "traced.wav"
        main(["render", "--config", str(config), "--input", str(wav),
              "--out", str(out), "--seed", "2"])
        rows = (tmp / "traced.trace.csv").read_text().strip().splitlines()
        header = rows[0].split(",")
        assert header[0] == "index"
        assert len(header) == 1 + 2 * cfg.latent_dims
        assert len(rows) - 1 == 6  # one row per window

    def test_render_is_byte_reproducible(self, tiny):
        tmp, config, _, wav = tiny
        # Stochastic latent path: flip deterministic_latent off via automation-free
        # config edit, keeping everything else.
        stoch = tmp / "stoch.toml"
        stoch.write_text(TINY_TOML.replace("deterministic_latent = true",
                                           "deterministic_latent = false"))
        a, b = tmp / "a.wav", tmp / "b.wav"
        for out in (a, b):
            assert main(["render", "--config", str(stoch), "--input", str(wav),
                         "--out", str(out), "--seed", "77"]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp / "a.trace.csv").read_bytes() == (tmp / "b.trace.csv").read_bytes()

    def test_automation_changes_the_result(self, tiny):
        tmp, config, _, wav = tiny
        auto = tmp / "auto.jsonl"
        auto.write_text(json.dumps({"t": 0.0, "param": "override",
                                    "dim": 0, "value": 3.0}) + "\n")
        plain, automated = tmp / "p.wav", tmp / "q.wav"
        main(["render", "--config", str(config), "--input", str(wav),
              "--out", str(plain), "--seed", "5"])
        main(["render", "--config", str(config), "--input", str(wav),
              "--automation", str(auto), "--out", str(automated), "--seed", "5"])
        assert plain.read_bytes() != automated.read_bytes()


IDLE_SCRIPT = Path(__file__).resolve().parent.parent / "configs" / "idle_after_one_event.jsonl"


class TestSimulate:
    def test_idle_script_switches_at_one_tenth_second(self, tiny):
        tmp, config, _, _ = tiny
        out = tmp / "session.jsonl"
        code = main(["simulate", "--config", str(config), "--script",
                     str(IDLE_SCRIPT), "--out", str(out), "--seed", "3",
                     "--duration", "0.5"])
        assert code == 0
        entries = [json.loads(line) for line in out.read_text().splitlines()]
        modes = [e for e in entries if e.get("kind") == "mode"]
        assert modes[0]["mode"] == "model"
        assert modes[0]["t"] == 0.1

    def test_byte_identical_replay(self, tiny):
        tmp, config, _, _ = tiny
        a, b = tmp / "a.jsonl", tmp / "b.jsonl"
        for out in (a, b):
            assert main(["simulate", "--config", str(config), "--script",
                         str(IDLE_SCRIPT), "--out", str(out), "--seed", "3",
                         "--duration", "2.0"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_header_records_seed(self, tiny):
        tmp, config, _, _ = tiny
        out = tmp / "s.jsonl"
        main(["simulate", "--config", str(config), "--script", str(IDLE_SCRIPT),
              "--out", str(out), "--seed", "1234", "--duration", "0.2"])
        header = json.loads(out.read_text().splitlines()[0])
        assert header["kind"] == "header"
        assert header["seed"] == 1234


class TestRun:
    def test_bounded_live_run_writes_session_log(self, tiny):
        tmp, _, _, _ = tiny
        config = tmp / "live.toml"
        config.write_text(TINY_TOML + f"""
[router]
session_log = "{tmp / 'live_session.jsonl'}"
midi_out = "{tmp / 'live_synth.midi'}"

[server]
enabled = false
""")
        assert main(["run", "--config", str(config), "--seed", "5",
                     "--max-seconds", "0.4"]) == 0
        entries = [json.loads(line)
                   for line in (tmp / "live_session.jsonl").read_text().splitlines()]
        assert entries[0]["kind"] == "header"
        assert entries[0]["seed"] == 5
        # Nobody played, so the model took the lead after the switchover.
        assert any(e.get("kind") == "mode" and e["mode"] == "model" for e in entries)


class TestExitCodes:
    def test_config_error_is_2(self, tiny, tmp_path):
        tmp, _, _, wav = tiny
        bad = tmp_path / "bad.toml"
        bad.write_text("[codec]\nwindow_sise = 16\n")
        assert main(["render", "--config", str(bad), "--input", str(wav),
                     "--out", str(tmp_path / "o.wav")]) == 2

    def test_missing_input_is_4(self, tiny):
        tmp, config, _, _ = tiny
        assert main(["render", "--config", str(config), "--input",
                     str(tmp / "missing.wav"), "--out", str(tmp / "o.wav"),
                     "--seed", "1"]) == 4

    def test_gradcheck_passes(self):
        assert main(["gradcheck", "--seed", "7"]) == 0

    def test_wrong_format_corpus_is_4(self, tiny):
        tmp, config, _, _ = tiny
        bad = tmp / "bad.jsonl"
        bad.write_text("{not json\n")
        assert main(["train-mdrnn", "--config", str(config), "--corpus", str(bad),
                     "--out", str(tmp / "m.json"), "--seed", "1"]) == 4

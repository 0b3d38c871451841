"""Live mode: both instrument paths on wall-clock time plus the web bridge.

Thread layout: one audio thread at window cadence, one interaction thread at
tick cadence, and an asyncio WebSocket server pumping a broadcast queue out
to every connected control surface. Cross-thread traffic goes through queues
only; parameter changes land at window/tick boundaries, never mid-window.
"""

from __future__ import annotations

import asyncio
import queue
import threading
import time

import numpy as np

from . import codec as codec_mod
from . import mdrnn as mdrnn_mod
from .config import EngineConfig
from .core import AudioWindow, Clock, ControlEvent, Rng, Source
from .engine import write_session_log
from .feedback import FeedbackState, Manipulation, Override, process_window
from .interaction import InteractionEngine
from .midi import FileMidiIn, FileMidiOut, NullMidiOut, route_in, route_out
from .protocol import ProtocolError, encode_message, parse_message
from .wavefile import wav_read, wav_write


class LiveEngine:
    def __init__(self, config: EngineConfig, seed: int):
        self.config = config
        self.seed = seed
        root = Rng(seed)
        if config.codec_model:
            self.codec = codec_mod.load_codec(config.codec_model)
        else:
            self.codec = codec_mod.init_codec(config.codec, root.fork())
        if config.mdrnn_model:
            self.mdrnn = mdrnn_mod.load_mdrnn(config.mdrnn_model)
        else:
            self.mdrnn = mdrnn_mod.init_mdrnn(config.mdrnn, root.fork())
        self.feedback = config.feedback.build(self.codec.config.latent_dims)
        self.manipulation = Manipulation()
        self.audio_rng = root.fork()
        self.interaction = InteractionEngine(self.mdrnn, config.interaction, root.fork())
        self.interaction.log.append(
            {"kind": "header", "seed": seed, "tick": config.interaction.tick,
             "switchover": config.interaction.switchover})

        self.stop = threading.Event()
        self.ws_ready = threading.Event()
        self.port: int | None = None
        self.user_queue: queue.Queue = queue.Queue()      # (channel, value)
        self.param_queue: queue.Queue = queue.Queue()     # validated protocol dicts
        self.broadcast: queue.Queue = queue.Queue(maxsize=4096)

        router = config.router
        self.midi_out = FileMidiOut(router.midi_out) if router.midi_out else NullMidiOut()
        self.pad_out = FileMidiOut(router.pad_out) if router.pad_out else NullMidiOut()
        self.midi_in = FileMidiIn(router.midi_in) if router.midi_in else None
        self.mapping = router.mapping

    # -- helpers -----------------------------------------------------------

    def _publish(self, msg: dict) -> None:
        try:
            self.broadcast.put_nowait(msg)
        except queue.Full:
            pass  # UI is a mirror, not a record; drop under backpressure

    def _send_midi(self, ev: ControlEvent) -> None:
        synth, pad = route_out(ev, self.mapping)
        self.midi_out.send(synth)
        self.pad_out.send(pad)

    def _drain_params(self) -> None:
        while True:
            try:
                msg = self.param_queue.get_nowait()
            except queue.Empty:
                return
            if msg["type"] == "gain":
                self.feedback.audio_gain = msg["value"]
            elif msg["type"] == "alpha":
                if msg.get("dim") is None:
                    self.feedback.alpha[:] = msg["value"]
                elif msg["dim"] < self.feedback.alpha.size:
                    self.feedback.alpha[msg["dim"]] = msg["value"]
            elif msg["type"] == "latent":
                if msg["dim"] < self.codec.config.latent_dims:
                    if msg.get("value") is None:
                        self.manipulation.clear(msg["dim"])
                    else:
                        self.manipulation.set(msg["dim"], Override(msg["value"]))

    # -- threads -----------------------------------------------------------

    def audio_loop(self) -> None:
        cfg = self.codec.config
        router = self.config.router
        windows = (wav_read(router.audio_in, cfg.window_size)
                   if router.audio_in else None)
        period = cfg.window_size / cfg.sample_rate
        state = FeedbackState()
        outs: list[AudioWindow] = []
        start = time.monotonic()
        i = 0
        while not self.stop.is_set():
            if windows is not None and i >= len(windows):
                break
            dry = (windows[i] if windows is not None
                   else AudioWindow(np.zeros(cfg.window_size), cfg.sample_rate, index=i))
            self._drain_params()
            out, state, trace = process_window(
                self.codec, self.feedback, state, dry, self.manipulation, self.audio_rng)
            outs.append(out)
            t = i * period
            for dim in range(cfg.latent_dims):
                self._publish({"t": t, "type": "latent", "dim": dim,
                               "value": float(trace.mean[dim])})
            i += 1
            deadline = start + i * period
            delay = deadline - time.monotonic()
            if delay > 0:
                self.stop.wait(delay)
        if router.audio_out and outs:
            wav_write(router.audio_out, outs, cfg.sample_rate)

    def _publish_log_tail(self, log_seen: int) -> int:
        """Broadcast new session-log entries in log order, so clients see the
        mode flip before the event that caused it reaches them as an echo."""
        log = self.interaction.log
        while log_seen < len(log):
            entry = log[log_seen]
            kind = entry.get("kind")
            if kind == "mode":
                self._publish({"t": entry["t"], "type": "mode", "mode": entry["mode"]})
            elif kind in ("user", "model"):
                self._publish({"t": entry["t"], "type": "control",
                               "channel": entry["channel"], "value": entry["value"]})
            log_seen += 1
        return log_seen

    def interaction_loop(self) -> None:
        iconf = self.config.interaction
        clock = Clock(tick=iconf.tick)
        engine = self.interaction
        log_seen = len(engine.log)
        start = time.monotonic()
        while not self.stop.is_set():
            deadline = start + (clock.steps + 1) * iconf.tick
            delay = deadline - time.monotonic()
            if delay > 0:
                self.stop.wait(delay)
            if self.stop.is_set():
                break
            clock.advance()
            if self.midi_in is not None:
                for msg in self.midi_in.poll():
                    ev = route_in(msg, self.mapping, clock)
                    if ev is not None:
                        self.user_queue.put((ev.channel, ev.value))
            while True:
                try:
                    channel, value = self.user_queue.get_nowait()
                except queue.Empty:
                    break
                ev = ControlEvent(clock.now, channel, value, Source.HUMAN)
                engine.on_user_event(ev, clock)
                self._send_midi(ev)
                log_seen = self._publish_log_tail(log_seen)
            for ev in engine.tick(clock):
                self._send_midi(ev)
            log_seen = self._publish_log_tail(log_seen)

    # -- websocket bridge ---------------------------------------------------

    async def _client_handler(self, websocket) -> None:
        async for raw in websocket:
            try:
                msg = parse_message(raw)
            except ProtocolError as exc:
                await websocket.close(code=1002, reason=str(exc)[:100])
                return
            if msg["type"] == "control":
                self.user_queue.put((msg["channel"], msg["value"]))
            elif msg["type"] in ("latent", "alpha", "gain"):
                self.param_queue.put(msg)
            # inbound "mode" is ignored; the engine owns the lead

    async def _serve(self) -> None:
        import websockets.asyncio.server as ws_server

        async with ws_server.serve(self._client_handler, self.config.server.host,
                                   self.config.server.port) as server:
            self.port = server.sockets[0].getsockname()[1]
            self.ws_ready.set()
            while not self.stop.is_set():
                try:
                    msg = self.broadcast.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.005)
                    continue
                text = encode_message(msg)
                for conn in list(server.connections):
                    try:
                        await conn.send(text)
                    except Exception:
                        pass  # client went away mid-send

    def serve_forever(self, max_seconds=None) -> None:
        """Run all threads until stopped; sets self.port once the bridge is up."""
        threads = [threading.Thread(target=self.audio_loop, daemon=True),
                   threading.Thread(target=self.interaction_loop, daemon=True)]
        for t in threads:
            t.start()
        ws_thread = None
        if self.config.server.enabled:
            ws_thread = threading.Thread(
                target=lambda: asyncio.run(self._serve()), daemon=True)
            ws_thread.start()
            self.ws_ready.wait(timeout=5.0)
            if self.port is not None:
                print(f"control surface: ws://{self.config.server.host}:{self.port}",
                      flush=True)
        try:
            if max_seconds is not None:
                self.stop.wait(max_seconds)
            else:
                while not self.stop.is_set():
                    time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        self.stop.set()
        for t in threads:
            t.join(timeout=5.0)
        if ws_thread is not None:
            ws_thread.join(timeout=5.0)
        if self.config.router.session_log:
            write_session_log(self.config.router.session_log, self.interaction.log)
        self.midi_out.close()
        self.pad_out.close()


def run_live(config: EngineConfig, seed: int, max_seconds=None) -> None:
    LiveEngine(config, seed).serve_forever(max_seconds=max_seconds)

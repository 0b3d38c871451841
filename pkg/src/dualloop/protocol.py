"""The control-surface wire protocol: one JSON object per message.

Message shapes (field order as serialized; ``t`` is seconds):

  {"t": 1.5, "type": "control", "channel": 3, "value": 0.5}
  {"t": 1.5, "type": "latent",  "dim": 2, "value": -0.7}      value null clears
  {"t": 1.5, "type": "mode",    "mode": "user" | "model"}
  {"t": 1.5, "type": "gain",    "value": 0.8}
  {"t": 1.5, "type": "alpha",   "dim": 0, "value": 0.9}       dim null = all dims

Unknown fields are dropped on receipt. Malformed JSON or an invalid message
raises ProtocolError, which the server turns into a connection close.
Inbound messages may omit ``t``; the engine stamps its own clock on them.
"""

from __future__ import annotations

import json
import math
from typing import Optional

from .core import NUM_CONTROL_CHANNELS, ProtocolError

MESSAGE_TYPES = ("control", "latent", "mode", "gain", "alpha")
_FIELD_ORDER = ("t", "type", "channel", "dim", "value", "mode")


def _want_number(msg: dict, key: str, *, lo=None, hi=None, optional=False,
                 allow_none=False) -> Optional[float]:
    if key not in msg or msg[key] is None:
        if (key not in msg and optional) or (msg.get(key) is None and allow_none):
            return None
        raise ProtocolError(f"'{key}' is required for type '{msg.get('type')}'")
    v = msg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ProtocolError(f"'{key}' must be a finite number, got {v!r}")
    v = float(v)
    if lo is not None and v < lo:
        raise ProtocolError(f"'{key}' {v} below {lo}")
    if hi is not None and v > hi:
        raise ProtocolError(f"'{key}' {v} above {hi}")
    return v


def _want_int(msg: dict, key: str, lo: int, hi: Optional[int] = None,
              allow_none=False) -> Optional[int]:
    v = _want_number(msg, key, lo=lo, hi=hi, allow_none=allow_none)
    if v is None:
        return None
    if v != int(v):
        raise ProtocolError(f"'{key}' must be an integer, got {v}")
    return int(v)


def validate_message(msg: dict) -> dict:
    """Check shape and ranges; returns the message stripped of unknown fields."""
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {mtype!r}")
    out: dict = {"type": mtype}
    t = _want_number(msg, "t", lo=0.0, optional=True)
    if t is not None:
        out["t"] = t

    if mtype == "control":
        out["channel"] = _want_int(msg, "channel", 0, NUM_CONTROL_CHANNELS - 1)
        out["value"] = _want_number(msg, "value", lo=0.0, hi=1.0)
    elif mtype == "latent":
        out["dim"] = _want_int(msg, "dim", 0)
        out["value"] = _want_number(msg, "value", allow_none=True)
    elif mtype == "mode":
        if msg.get("mode") not in ("user", "model"):
            raise ProtocolError(f"mode must be 'user' or 'model', got {msg.get('mode')!r}")
        out["mode"] = msg["mode"]
    elif mtype == "gain":
        out["value"] = _want_number(msg, "value", lo=0.0)
    elif mtype == "alpha":
        out["dim"] = _want_int(msg, "dim", 0, allow_none=True)
        out["value"] = _want_number(msg, "value", lo=0.0, hi=1.0)
    return out


def encode_message(msg: dict) -> str:
    """Validate and serialize with a fixed field order (stable replay bytes)."""
    checked = validate_message(msg)
    ordered = {k: checked[k] for k in _FIELD_ORDER if k in checked}
    return json.dumps(ordered)


def parse_message(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc}") from exc
    return validate_message(raw)

"""Frame codec: 4-byte big-endian length prefix + canonical UTF-8 JSON body.

The body always carries a ``"type"`` discriminator and is serialized with
sorted keys and no whitespace, so structurally equal messages encode to the
same bytes.
"""

from __future__ import annotations

import json
import math
import struct
from typing import Any

from ..ransim.types import KpmSample, Scheduler, SliceId
from .messages import (
    Control,
    ControlAck,
    ControlDirective,
    E2Message,
    Error,
    KpmReport,
    Subscribe,
)

HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 1 << 20


class E2Error(Exception):
    """Base for connection-level decode failures. None of them are fatal."""


class NeedMoreData(E2Error):
    def __init__(self, needed: int | None = None):
        super().__init__("truncated frame" if needed is None else f"need {needed} more bytes")
        self.needed = needed


class FrameTooLarge(E2Error):
    def __init__(self, length: int):
        super().__init__(f"frame body of {length} bytes exceeds {MAX_FRAME_BYTES}")
        self.length = length


class ProtocolError(E2Error):
    pass


# ------------------------------------------------------------------ to JSON
def _sample_to_obj(s: KpmSample) -> dict[str, Any]:
    return {
        "window_end_ms": s.window_end,
        "slice": s.slice.label,
        "dl_buffer_bytes": s.dl_buffer,
        "dl_brate_mbps": float(s.dl_brate),
        "dl_tx_pkts": s.dl_tx_pkts,
        "granted_prbs": s.granted_prbs,
        "requested_prbs": s.requested_prbs,
    }


def _directive_to_obj(d: ControlDirective) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if d.slicing is not None:
        out["slicing"] = list(d.slicing)
    if d.sched:
        out["sched"] = {s.label: p.name for s, p in d.sched.items()}
    return out


def message_to_obj(msg: E2Message) -> dict[str, Any]:
    if isinstance(msg, Subscribe):
        return {
            "type": "subscribe",
            "du_report_ms": msg.du_report_ms,
            "kpm_log_ms": msg.kpm_log_ms,
            "latest_only": msg.latest_only,
        }
    if isinstance(msg, KpmReport):
        return {
            "type": "kpm_report",
            "report_seq": msg.report_seq,
            "samples": [_sample_to_obj(s) for s in msg.samples],
        }
    if isinstance(msg, Control):
        return {
            "type": "control",
            "action_seq": msg.action_seq,
            "directive": _directive_to_obj(msg.directive),
        }
    if isinstance(msg, ControlAck):
        return {"type": "control_ack", "action_seq": msg.action_seq, "accepted": msg.accepted}
    if isinstance(msg, Error):
        return {"type": "error", "code": msg.code, "detail": msg.detail}
    raise TypeError(f"not an E2 message: {type(msg).__name__}")


def canonical_json(obj: Any) -> bytes:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


def encode_message(msg: E2Message) -> bytes:
    body = canonical_json(message_to_obj(msg))
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLarge(len(body))
    return HEADER.pack(len(body)) + body


# ---------------------------------------------------------------- from JSON
def _field(obj: dict, key: str) -> Any:
    try:
        return obj[key]
    except KeyError:
        raise ProtocolError(f"missing field {key!r}") from None


def _int(obj: dict, key: str) -> int:
    v = _field(obj, key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ProtocolError(f"field {key!r} must be an integer")
    return v


def _bool(obj: dict, key: str) -> bool:
    v = _field(obj, key)
    if not isinstance(v, bool):
        raise ProtocolError(f"field {key!r} must be a boolean")
    return v


def _str(obj: dict, key: str) -> str:
    v = _field(obj, key)
    if not isinstance(v, str):
        raise ProtocolError(f"field {key!r} must be a string")
    return v


def _obj(v: Any, what: str) -> dict:
    if not isinstance(v, dict):
        raise ProtocolError(f"{what} must be an object")
    return v


def _check_keys(obj: dict, allowed: set[str], what: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ProtocolError(f"unexpected fields in {what}: {sorted(extra)}")


_SAMPLE_KEYS = {
    "window_end_ms", "slice", "dl_buffer_bytes", "dl_brate_mbps",
    "dl_tx_pkts", "granted_prbs", "requested_prbs",
}


def _sample_from_obj(raw: Any) -> KpmSample:
    o = _obj(raw, "sample")
    _check_keys(o, _SAMPLE_KEYS, "sample")
    brate = _field(o, "dl_brate_mbps")
    if not isinstance(brate, float) or not math.isfinite(brate) or brate < 0:
        raise ProtocolError("dl_brate_mbps must be a finite non-negative float")
    try:
        slice_id = SliceId.parse(_str(o, "slice"))
    except ValueError as exc:
        raise ProtocolError(str(exc)) from None
    counts = [_int(o, k) for k in ("dl_buffer_bytes", "dl_tx_pkts", "granted_prbs", "requested_prbs")]
    if min(counts) < 0:
        raise ProtocolError("sample counters must be non-negative")
    return KpmSample(
        window_end=_int(o, "window_end_ms"),
        slice=slice_id,
        dl_buffer=counts[0],
        dl_brate=brate,
        dl_tx_pkts=counts[1],
        granted_prbs=counts[2],
        requested_prbs=counts[3],
    )


def _directive_from_obj(raw: Any) -> ControlDirective:
    o = _obj(raw, "directive")
    _check_keys(o, {"slicing", "sched"}, "directive")
    slicing = None
    if "slicing" in o:
        v = o["slicing"]
        if (
            not isinstance(v, list)
            or len(v) != 3
            or any(not isinstance(x, int) or isinstance(x, bool) or x < 0 for x in v)
        ):
            raise ProtocolError("slicing must be three non-negative integers")
        slicing = tuple(v)
    sched = None
    if "sched" in o:
        m = _obj(o["sched"], "sched")
        try:
            sched = {SliceId.parse(k): Scheduler.parse(_str(m, k)) for k in m}
        except ValueError as exc:
            raise ProtocolError(str(exc)) from None
        if not sched:
            raise ProtocolError("sched must name at least one slice")
    if slicing is None and sched is None:
        raise ProtocolError("directive sets nothing")
    return ControlDirective(slicing=slicing, sched=sched)  # type: ignore[arg-type]


def message_from_obj(obj: Any) -> E2Message:
    o = _obj(obj, "message")
    kind = o.get("type")
    if kind == "subscribe":
        _check_keys(o, {"type", "du_report_ms", "kpm_log_ms", "latest_only"}, kind)
        du, log_ = _int(o, "du_report_ms"), _int(o, "kpm_log_ms")
        if du <= 0 or log_ <= 0:
            raise ProtocolError("timer periods must be positive")
        return Subscribe(du, log_, _bool(o, "latest_only"))
    if kind == "kpm_report":
        _check_keys(o, {"type", "report_seq", "samples"}, kind)
        samples = _field(o, "samples")
        if not isinstance(samples, list):
            raise ProtocolError("samples must be a list")
        return KpmReport(_int(o, "report_seq"), tuple(_sample_from_obj(s) for s in samples))
    if kind == "control":
        _check_keys(o, {"type", "action_seq", "directive"}, kind)
        return Control(_int(o, "action_seq"), _directive_from_obj(_field(o, "directive")))
    if kind == "control_ack":
        _check_keys(o, {"type", "action_seq", "accepted"}, kind)
        return ControlAck(_int(o, "action_seq"), _bool(o, "accepted"))
    if kind == "error":
        _check_keys(o, {"type", "code", "detail"}, kind)
        return Error(_str(o, "code"), _str(o, "detail"))
    raise ProtocolError(f"unknown message type {kind!r}")


def decode_body(body: bytes) -> E2Message:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, ValueError, RecursionError) as exc:
        raise ProtocolError(f"malformed body: {exc}") from None
    try:
        return message_from_obj(obj)
    except RecursionError:  # pragma: no cover - json already bounds nesting
        raise ProtocolError("body too deeply nested") from None


def decode_frame(data: bytes | bytearray | memoryview, offset: int = 0) -> tuple[E2Message, int]:
    """Decode one frame starting at ``offset``; return the message and bytes consumed."""
    avail = len(data) - offset
    if avail < HEADER.size:
        raise NeedMoreData(HEADER.size - avail)
    (length,) = HEADER.unpack_from(data, offset)
    if length > MAX_FRAME_BYTES:
        raise FrameTooLarge(length)
    end = offset + HEADER.size + length
    if len(data) < end:
        raise NeedMoreData(end - len(data))
    return decode_body(bytes(data[offset + HEADER.size : end])), HEADER.size + length


def decode_message(data: bytes) -> E2Message:
    """Decode exactly one frame."""
    msg, used = decode_frame(data)
    if used != len(data):
        raise ProtocolError(f"{len(data) - used} trailing bytes after frame")
    return msg

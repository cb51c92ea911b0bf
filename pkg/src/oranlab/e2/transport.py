"""Stream framing and connections.

A connection is owned by one party: reads and writes are serialized through
it and it enforces that ``report_seq`` and ``action_seq`` strictly increase
in each direction.
"""

from __future__ import annotations

import socket
import threading
from collections import deque

from .codec import (
    HEADER,
    MAX_FRAME_BYTES,
    E2Error,
    FrameTooLarge,
    ProtocolError,
    decode_body,
    encode_message,
)
from .messages import Control, E2Message, KpmReport


class FrameDecoder:
    """Incremental decoder: feed arbitrary chunks, get whole messages back.

    Bad frames are skipped (their length prefix still tells us where the next
    frame starts) and recorded in ``errors``; oversized frames are discarded
    as they stream in.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self._skip = 0
        self.errors: list[E2Error] = []

    def feed(self, data: bytes) -> list[E2Message]:
        self._buf.extend(data)
        out: list[E2Message] = []
        while True:
            if self._skip:
                n = min(self._skip, len(self._buf))
                del self._buf[:n]
                self._skip -= n
                if self._skip:
                    break
            if len(self._buf) < HEADER.size:
                break
            (length,) = HEADER.unpack_from(self._buf, 0)
            if length > MAX_FRAME_BYTES:
                self.errors.append(FrameTooLarge(length))
                del self._buf[: HEADER.size]
                self._skip = length
                continue
            end = HEADER.size + length
            if len(self._buf) < end:
                break
            body = bytes(self._buf[HEADER.size : end])
            del self._buf[:end]
            try:
                out.append(decode_body(body))
            except ProtocolError as exc:
                self.errors.append(exc)
        return out

    @property
    def pending(self) -> int:
        return len(self._buf)


class SeqGuard:
    """Tracks the last report/action sequence number seen in one direction."""

    def __init__(self) -> None:
        self.last_report: int | None = None
        self.last_action: int | None = None

    def check(self, msg: E2Message) -> None:
        if isinstance(msg, KpmReport):
            if self.last_report is not None and msg.report_seq <= self.last_report:
                raise ProtocolError(
                    f"report_seq {msg.report_seq} not above {self.last_report}"
                )
            self.last_report = msg.report_seq
        elif isinstance(msg, Control):
            if self.last_action is not None and msg.action_seq <= self.last_action:
                raise ProtocolError(
                    f"action_seq {msg.action_seq} not above {self.last_action}"
                )
            self.last_action = msg.action_seq


class LoopbackEndpoint:
    """One side of an in-process link. Messages still travel as encoded bytes."""

    def __init__(self) -> None:
        self.peer: LoopbackEndpoint | None = None
        self._decoder = FrameDecoder()
        self._inbox: deque[E2Message] = deque()
        self._out_seq = SeqGuard()
        self._in_seq = SeqGuard()
        self.bytes_sent = 0

    def send(self, msg: E2Message) -> None:
        self._out_seq.check(msg)
        frame = encode_message(msg)
        self.bytes_sent += len(frame)
        assert self.peer is not None
        self.peer._deliver(frame)

    def _deliver(self, frame: bytes) -> None:
        for msg in self._decoder.feed(frame):
            self._in_seq.check(msg)
            self._inbox.append(msg)

    def receive(self) -> list[E2Message]:
        out = list(self._inbox)
        self._inbox.clear()
        return out

    @property
    def errors(self) -> list[E2Error]:
        return self._decoder.errors


def loopback_pair() -> tuple[LoopbackEndpoint, LoopbackEndpoint]:
    a, b = LoopbackEndpoint(), LoopbackEndpoint()
    a.peer, b.peer = b, a
    return a, b


class E2Connection:
    """Framed message connection over a stream socket."""

    def __init__(self, sock: socket.socket, chunk_size: int = 65536) -> None:
        self.sock = sock
        self.chunk_size = chunk_size
        self._decoder = FrameDecoder()
        self._ready: deque[E2Message] = deque()
        self._out_seq = SeqGuard()
        self._in_seq = SeqGuard()
        self._send_lock = threading.Lock()
        self._recv_lock = threading.Lock()

    def send(self, msg: E2Message) -> None:
        with self._send_lock:
            self._out_seq.check(msg)
            self.sock.sendall(encode_message(msg))

    def recv(self) -> E2Message | None:
        """Next message, or None once the peer closed the stream."""
        with self._recv_lock:
            while not self._ready:
                chunk = self.sock.recv(self.chunk_size)
                if not chunk:
                    return None
                for msg in self._decoder.feed(chunk):
                    self._in_seq.check(msg)
                    self._ready.append(msg)
            return self._ready.popleft()

    @property
    def errors(self) -> list[E2Error]:
        return self._decoder.errors

    def close(self) -> None:
        self.sock.close()

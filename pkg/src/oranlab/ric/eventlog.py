"""Structured RIC event log: one JSON object per line."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..e2.codec import canonical_json


@dataclass(frozen=True)
class Event:
    tick: int
    session: str
    event: str
    payload: Any
    digest: str

    def line(self) -> str:
        return json.dumps(
            {"tick": self.tick, "session": self.session, "event": self.event, "digest": self.digest},
            sort_keys=True, separators=(",", ":"),
        )


class EventLog:
    def __init__(self) -> None:
        self.events: list[Event] = []

    def emit(self, tick: int, session: str, event: str, payload: Any = None) -> Event:
        ev = Event(tick, session, event, payload, hashlib.sha256(canonical_json(payload)).hexdigest())
        self.events.append(ev)
        return ev

    def select(self, event: str | None = None, session: str | None = None) -> list[Event]:
        return [
            e for e in self.events
            if (event is None or e.event == event) and (session is None or e.session == session)
        ]

    def ticks(self, event: str, session: str | None = None) -> list[int]:
        return [e.tick for e in self.select(event, session)]

    def dumps(self) -> str:
        return "".join(e.line() + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.dumps().encode("utf-8"))

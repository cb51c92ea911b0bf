"""Per-xApp state machine: window history, warm-up, and inference."""

from __future__ import annotations

from collections import deque

from ..drl.artifact import PolicyModel
from ..drl.autoencoder import WINDOW_K
from ..drl.observation import ObservationBuilder
from ..e2.codec import message_to_obj
from ..e2.messages import ControlDirective, KpmReport
from ..intent import IntentSpec
from .descriptor import XappDescriptor
from .eventlog import EventLog


class DomainViolation(RuntimeError):
    pass


class XappSession:
    def __init__(
        self,
        descriptor: XappDescriptor,
        model: PolicyModel,
        intent: IntentSpec,
        log: EventLog | None = None,
    ) -> None:
        if model.encoder is None:
            raise ValueError("model has no encoder")
        self.descriptor = descriptor
        self.model = model
        self.intent = intent
        self.timers = descriptor.effective_timers
        self.space = descriptor.domain.action_space()
        self.allowed = descriptor.domain.parameters
        self.observer = ObservationBuilder(
            model.encoder, intent.slice_ids, {s.name: s.observation_kpis for s in intent.slices}
        )
        self.log = log if log is not None else EventLog()
        self.windows: deque = deque(maxlen=WINDOW_K)
        self.last_report_seq: int | None = None
        self.last_action: int | None = None
        self.warm = False
        self.counters = {"reports": 0, "windows": 0, "directives": 0, "resets": 0, "rejected": 0, "acks": 0}

    @property
    def name(self) -> str:
        return self.descriptor.xapp_id

    def on_kpm_report(self, report: KpmReport, tick: int) -> None:
        if self.last_report_seq is not None and report.report_seq != self.last_report_seq + 1:
            self.windows.clear()
            self.warm = False
            self.counters["resets"] += 1
            self.log.emit(tick, self.name, "window_reset",
                          {"expected": self.last_report_seq + 1, "got": report.report_seq})
        self.last_report_seq = report.report_seq
        wins = report.windows()
        self.windows.extend(wins)
        self.counters["reports"] += 1
        self.counters["windows"] += len(wins)
        self.log.emit(tick, self.name, "report", message_to_obj(report))
        if not self.warm and len(self.windows) >= WINDOW_K:
            self.warm = True
            self.log.emit(tick, self.name, "warmup_done", {"windows": len(self.windows)})

    def is_action_tick(self, tick: int) -> bool:
        return tick > 0 and tick % self.timers.action_update == 0

    def infer(self) -> ControlDirective | None:
        """Directive from the latest K windows, or None while warming up."""
        if len(self.windows) < WINDOW_K:
            return None
        obs = self.observer.build(list(self.windows))
        action = self.model.act(obs)
        directive = self.space[action]
        if not set(directive.parameters()) <= self.allowed:
            raise DomainViolation(f"{self.name} produced {sorted(directive.parameters())}")
        self.last_action = action
        return directive

    def on_ack(self, tick: int, action_seq: int, accepted: bool, params: list[str]) -> None:
        if accepted:
            self.counters["acks"] += 1
            self.log.emit(tick, self.name, "ack", {"action_seq": action_seq, "params": params})
        else:
            self.counters["rejected"] += 1
            self.log.emit(tick, self.name, "rejected", {"action_seq": action_seq, "params": params})

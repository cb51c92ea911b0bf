"""The gNB side of the E2 link: serves subscriptions and applies controls."""

from __future__ import annotations

from dataclasses import dataclass

from ..e2.messages import Control, ControlAck, Error, KpmReport, Subscribe
from ..e2.transport import LoopbackEndpoint
from ..ransim.world import RanWorld


@dataclass
class _Subscription:
    endpoint: LoopbackEndpoint
    request: Subscribe
    start: int
    last_end: int
    seq: int = 0


class GnbNode:
    def __init__(self, world: RanWorld) -> None:
        self.world = world
        self.endpoints: list[LoopbackEndpoint] = []
        self.subscriptions: list[_Subscription] = []
        self.controls_applied = 0

    def attach(self, endpoint: LoopbackEndpoint) -> None:
        self.endpoints.append(endpoint)

    def poll(self) -> None:
        """Handle everything the RIC has sent so far."""
        now = self.world.now
        for ep in self.endpoints:
            for msg in ep.receive():
                if isinstance(msg, Subscribe):
                    self.subscriptions.append(_Subscription(ep, msg, now, now))
                elif isinstance(msg, Control):
                    d = msg.directive
                    accepted = self.world.apply_control(d.slicing, d.sched)
                    self.controls_applied += 1
                    ep.send(ControlAck(msg.action_seq, accepted))
                else:
                    ep.send(Error("unexpected_message", type(msg).__name__))

    def emit_reports(self) -> None:
        """Send every report that falls due at the current time."""
        now = self.world.now
        for sub in self.subscriptions:
            period = sub.request.du_report_ms
            log_ms = sub.request.kpm_log_ms
            if now == sub.start or (now - sub.start) % period:
                continue
            if sub.request.latest_only:
                ends = [now]
            else:
                ends = list(range(sub.last_end + log_ms, now + 1, log_ms))
            samples = []
            for end in ends:
                samples.extend(self.world.sample_kpm(end - log_ms, end))
            sub.seq += 1
            sub.last_end = now
            sub.endpoint.send(KpmReport(sub.seq, tuple(samples)))

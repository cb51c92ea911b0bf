"""RIC runtime: dispatch, report demultiplexing, control merging, virtual clock."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..catalog import Catalog
from ..drl.artifact import PolicyModel
from ..e2.codec import message_to_obj
from ..e2.messages import Control, ControlAck, ControlDirective, KpmReport, Subscribe
from ..e2.transport import LoopbackEndpoint, loopback_pair
from ..intent import parse_intent
from .descriptor import XappDescriptor
from .eventlog import EventLog
from .gnb import GnbNode
from .session import XappSession

log = logging.getLogger(__name__)

RIC = "ric"


class DomainConflict(ValueError):
    code = "domain_conflict"


def check_disjoint(descriptors: Sequence[XappDescriptor]) -> None:
    seen: dict[str, str] = {}
    for d in descriptors:
        for p in sorted(d.domain.parameters):
            if p in seen:
                raise DomainConflict(f"{d.xapp_id} and {seen[p]} both control {p}")
            seen[p] = d.xapp_id


@dataclass
class MergeResult:
    directive: ControlDirective | None
    owners: dict[str, str] = field(default_factory=dict)  # parameter -> session name
    conflicts: list[tuple[str, str, str]] = field(default_factory=list)  # (param, loser, winner)


def merge_directives(pending: Sequence[tuple[str, ControlDirective]]) -> MergeResult:
    """Fold per-session directives into one; a later writer of a parameter wins."""
    params: dict[str, object] = {}
    result = MergeResult(None)
    for name, directive in pending:
        for p, v in directive.parameters().items():
            if p in result.owners and result.owners[p] != name:
                result.conflicts.append((p, result.owners[p], name))
            params[p] = v
            result.owners[p] = name
    if params:
        result.directive = ControlDirective.from_parameters(params)
    return result


@dataclass
class _Link:
    key: tuple[int, int]
    endpoint: LoopbackEndpoint
    sessions: list[XappSession]


class RicRuntime:
    """Running sessions plus their E2 links. Drive it with :meth:`tick`."""

    def __init__(self, links: list[_Link], log_: EventLog, workers: int = 0) -> None:
        self.links = links
        self.log = log_
        self.sessions = [s for link in links for s in link.sessions]
        self.action_seq = 0
        self._pending_acks: dict[int, dict[str, str]] = {}
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 0 else None
        self.controls: list[Control] = []

    @property
    def subscriptions(self) -> list[Subscribe]:
        return [Subscribe(k[0], k[1]) for k in (link.key for link in self.links)]

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()

    # ------------------------------------------------------------ inbound
    def receive(self, now: int) -> None:
        """Consume reports and acks waiting on every link."""
        by_name = {s.name: s for s in self.sessions}
        for link in self.links:
            for msg in link.endpoint.receive():
                if isinstance(msg, KpmReport):
                    for s in link.sessions:
                        s.on_kpm_report(msg, now)
                elif isinstance(msg, ControlAck):
                    owners = self._pending_acks.pop(msg.action_seq, {})
                    self.log.emit(now, RIC, "control_ack", message_to_obj(msg))
                    per_session: dict[str, list[str]] = {}
                    for p, name in owners.items():
                        per_session.setdefault(name, []).append(p)
                    for name, ps in per_session.items():
                        # Only a slicing triple can be refused; scheduler changes still apply.
                        ok = msg.accepted or "slicing" not in ps
                        by_name[name].on_ack(now, msg.action_seq, ok, sorted(ps))
                for err in link.endpoint.errors:
                    self.log.emit(now, RIC, "link_error", str(err))
                link.endpoint.errors.clear()

    # ----------------------------------------------------------- decisions
    def _infer(self, due: list[XappSession]) -> list[ControlDirective | None]:
        if self._pool is None:
            return [s.infer() for s in due]
        return list(self._pool.map(XappSession.infer, due))

    def apply_controls(self, pending: Sequence[tuple[str, ControlDirective]], now: int) -> Control | None:
        merged = merge_directives(pending)
        for p, loser, winner in merged.conflicts:
            log.warning("tick %d: %s overrides %s on %s", now, winner, loser, p)
            self.log.emit(now, RIC, "merge_conflict", {"param": p, "overridden": loser, "winner": winner})
        if merged.directive is None:
            return None
        self.action_seq += 1
        control = Control(self.action_seq, merged.directive)
        self._pending_acks[self.action_seq] = merged.owners
        self.links[0].endpoint.send(control)
        self.controls.append(control)
        self.log.emit(now, RIC, "control", message_to_obj(control))
        return control

    def tick(self, now: int) -> Control | None:
        self.receive(now)
        due = [s for s in self.sessions if s.is_action_tick(now)]
        results = self._infer(due)
        pending = []
        for s, d in zip(due, results):
            if d is None:
                continue
            s.counters["directives"] += 1
            s.log.emit(now, s.name, "directive", {"action": s.last_action, **_directive_obj(d)})
            pending.append((s.name, d))
        return self.apply_controls(pending, now)


def _directive_obj(d: ControlDirective) -> dict:
    return message_to_obj(Control(0, d))["directive"]


def dispatch(
    descriptors: Sequence[XappDescriptor],
    gnb: GnbNode,
    catalog: Catalog | None = None,
    models: dict[str, tuple[PolicyModel, object]] | None = None,
    log_: EventLog | None = None,
    workers: int = 0,
    latest_only: bool = False,
) -> RicRuntime:
    """Validate, load and connect a set of xApps.

    Models and intents come from ``catalog`` unless supplied in ``models``
    as ``xapp_id -> (PolicyModel, IntentSpec)``. One subscription is opened
    per distinct (report period, log period) pair.
    """
    check_disjoint(descriptors)
    ev = log_ if log_ is not None else EventLog()
    loaded = []
    for d in descriptors:
        if models is not None and d.xapp_id in models:
            model, intent = models[d.xapp_id]
        else:
            if catalog is None:
                raise ValueError(f"no catalog to load {d.xapp_id} from")
            model = PolicyModel.from_bytes(catalog.get("model", d.model_id))
            intent = parse_intent(catalog.get("intent", d.intent_id))
        loaded.append(XappSession(d, model, intent, ev))  # type: ignore[arg-type]

    links: dict[tuple[int, int], _Link] = {}
    for s in loaded:
        t = s.timers
        key = (t.du_report, t.kpm_log)
        if key not in links:
            ric_end, gnb_end = loopback_pair()
            gnb.attach(gnb_end)
            links[key] = _Link(key, ric_end, [])
            sub = Subscribe(key[0], key[1], latest_only)
            ric_end.send(sub)
            ev.emit(gnb.world.now, RIC, "subscribe", message_to_obj(sub))
        links[key].sessions.append(s)
        ev.emit(gnb.world.now, s.name, "dispatched", s.descriptor.to_obj())
    runtime = RicRuntime(list(links.values()), ev, workers)
    order = {d.xapp_id: i for i, d in enumerate(descriptors)}
    runtime.sessions.sort(key=lambda s: order[s.name])
    return runtime


def run_virtual(
    gnb: GnbNode,
    ric: RicRuntime | None,
    duration_ms: int,
    on_ms: Callable[[int], None] | None = None,
) -> None:
    """Advance gNB and RIC together, one TTI per virtual millisecond.

    Each millisecond: the gNB applies pending controls, simulates one TTI,
    then sends due reports; the RIC then consumes them and may act. A
    control sent at time t therefore shapes the TTI starting at t.
    """
    world = gnb.world
    end = world.now + duration_ms
    gnb.poll()
    while world.now < end:
        gnb.poll()
        world.step()
        gnb.emit_reports()
        if ric is not None:
            ric.tick(world.now)
        if on_ms is not None:
            on_ms(world.now)
    gnb.poll()
    if ric is not None:
        ric.receive(world.now)

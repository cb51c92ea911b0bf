"""xApp descriptors, control domains and on-boarding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from ..catalog import Catalog, NotFound
from ..drl.artifact import ArtifactError, PolicyModel
from ..intent import ActionSpace, IntentError, build_action_space, parse_intent
from ..ransim.types import SLICES, SliceId
from .timers import TimerSet


class OnboardError(Exception):
    code = "onboard_error"


class ActionSpaceMismatch(OnboardError):
    code = "action_space_mismatch"


class CorruptModel(OnboardError):
    code = "corrupt_model"


class UnknownIntent(OnboardError):
    code = "unknown_intent"


@dataclass(frozen=True)
class Domain:
    """The control parameters one xApp may set."""

    kind: str  # "slicing", "sched" or "joint"
    slice: SliceId | None = None  # only for single-slice "sched"

    def __post_init__(self) -> None:
        if self.kind not in ("slicing", "sched", "joint"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.slice is not None and self.kind != "sched":
            raise ValueError("only a scheduling domain can be narrowed to one slice")

    @classmethod
    def parse(cls, text: str) -> "Domain":
        """``slicing``, ``sched``, ``sched:<slice>`` or ``joint``."""
        kind, _, rest = text.partition(":")
        return cls(kind, SliceId.parse(rest) if rest else None)

    def __str__(self) -> str:
        return f"sched:{self.slice.label}" if self.slice is not None else self.kind

    @property
    def parameters(self) -> frozenset[str]:
        sched = {f"sched:{s.label}" for s in ((self.slice,) if self.slice is not None else SLICES)}
        if self.kind == "slicing":
            return frozenset({"slicing"})
        if self.kind == "sched":
            return frozenset(sched)
        return frozenset(sched | {"slicing"})

    def action_space(self) -> ActionSpace:
        kinds = {"slicing": {"ran_slicing"}, "sched": {"scheduling"}, "joint": {"ran_slicing", "scheduling"}}
        return build_action_space(kinds[self.kind], slice_id=self.slice)


def domain_for_intent_actions(kinds, slice_id: SliceId | None = None) -> Domain:
    kinds = frozenset(kinds)
    if kinds == {"ran_slicing"}:
        return Domain("slicing")
    if kinds == {"scheduling"}:
        return Domain("sched", slice_id)
    return Domain("joint")


@dataclass(frozen=True)
class XappDescriptor:
    xapp_id: str
    model_id: str
    intent_id: str
    domain: Domain
    timers: TimerSet
    # Overrides timers.du_report; used for the hierarchical reporting setups.
    report_ms: int | None = None

    @property
    def effective_timers(self) -> TimerSet:
        return self.timers if self.report_ms is None else self.timers.with_report(self.report_ms)

    def to_obj(self) -> dict[str, Any]:
        return {
            "xapp_id": self.xapp_id,
            "model_id": self.model_id,
            "intent_id": self.intent_id,
            "domain": str(self.domain),
            "timers": self.timers.to_obj(),
            "report_ms": self.report_ms,
        }

    def to_bytes(self) -> bytes:
        return (json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n").encode("utf-8")

    @classmethod
    def from_obj(cls, o: dict[str, Any]) -> "XappDescriptor":
        t = o["timers"]
        return cls(o["xapp_id"], o["model_id"], o["intent_id"], Domain.parse(o["domain"]),
                   TimerSet(t["du_report"], t["kpm_log"], t["action_update"]), o.get("report_ms"))

    @classmethod
    def from_bytes(cls, data: bytes) -> "XappDescriptor":
        return cls.from_obj(json.loads(data))


def onboard_xapp(
    catalog: Catalog,
    xapp_id: str,
    model_id: str,
    intent_id: str,
    domain: Domain | str,
    timers: TimerSet,
    report_ms: int | None = None,
) -> tuple[XappDescriptor, dict[str, Any]]:
    """Validate a model against its domain and store the descriptor.

    Returns the descriptor and a validation report.
    """
    dom = Domain.parse(domain) if isinstance(domain, str) else domain
    try:
        model = PolicyModel.from_bytes(catalog.get("model", model_id))
    except ArtifactError as exc:
        raise CorruptModel(f"model {model_id!r}: {exc}") from None
    try:
        intent = parse_intent(catalog.get("intent", intent_id))
    except NotFound:
        raise UnknownIntent(f"no intent named {intent_id!r}") from None
    except IntentError as exc:
        raise UnknownIntent(f"intent {intent_id!r} is invalid: {exc}") from None

    space = dom.action_space()
    outputs = model.net.sizes[-1]
    if outputs != len(space):
        raise ActionSpaceMismatch(
            f"model has {outputs} outputs but domain {dom} has {len(space)} actions"
        )
    recorded = model.metadata.get("domain")
    if recorded is not None and recorded != str(dom):
        raise ActionSpaceMismatch(f"model was trained for domain {recorded}, not {dom}")
    if model.encoder is None:
        raise CorruptModel(f"model {model_id!r} carries no encoder")
    obs_dim = model.net.sizes[0]
    if obs_dim != 3 * len(intent.slices):
        raise ActionSpaceMismatch(
            f"model observes {obs_dim} values but intent lists {len(intent.slices)} slices"
        )
    if report_ms is not None:
        timers.with_report(report_ms)  # validates the override
    desc = XappDescriptor(xapp_id, model_id, intent_id, dom, timers, report_ms)
    catalog.put("xapp", xapp_id, desc.to_bytes(), {"domain": str(dom), "model_id": model_id})
    report = {
        "xapp_id": xapp_id,
        "domain": str(dom),
        "actions": len(space),
        "observation_dim": obs_dim,
        "timers": desc.effective_timers.to_obj(),
        "checks": ["model_loads", "intent_parses", "action_space_matches", "observation_matches"],
    }
    return desc, report

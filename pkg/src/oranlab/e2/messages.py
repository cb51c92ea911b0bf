"""E2-like message types exchanged between the gNB and the RIC."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from ..ransim.types import SLICES, KpmSample, Scheduler, SliceId


@dataclass(frozen=True)
class ControlDirective:
    """A control request: a slicing triple, scheduler profiles, or both.

    ``sched`` may name every slice or a subset (a per-slice scheduling xApp
    only ever sets its own slice).
    """

    slicing: tuple[int, int, int] | None = None
    sched: Mapping[SliceId, Scheduler] | None = None

    def __post_init__(self) -> None:
        if self.slicing is None and not self.sched:
            raise ValueError("a directive must set slicing or at least one scheduler")
        if self.slicing is not None:
            if len(self.slicing) != 3:
                raise ValueError("slicing must be a triple")
            object.__setattr__(self, "slicing", tuple(int(x) for x in self.slicing))
        if self.sched is not None:
            items = {SliceId(k): Scheduler(v) for k, v in self.sched.items()}
            object.__setattr__(self, "sched", dict(sorted(items.items())))

    def __hash__(self) -> int:
        sched = tuple(sorted(self.sched.items())) if self.sched else None
        return hash((self.slicing, sched))

    def parameters(self) -> dict[str, object]:
        """Flatten into parameter-name -> value, e.g. ``{"slicing": (..), "sched:embb": RR}``."""
        out: dict[str, object] = {}
        if self.slicing is not None:
            out["slicing"] = self.slicing
        for s, p in (self.sched or {}).items():
            out[f"sched:{s.label}"] = p
        return out

    @classmethod
    def from_parameters(cls, params: Mapping[str, object]) -> "ControlDirective":
        slicing = params.get("slicing")
        sched = {
            SliceId.parse(k.split(":", 1)[1]): Scheduler(v)
            for k, v in params.items()
            if k.startswith("sched:")
        }
        return cls(slicing=slicing, sched=sched or None)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Subscribe:
    du_report_ms: int
    kpm_log_ms: int
    # Report only the newest log window instead of every window since the last report.
    latest_only: bool = False

    @property
    def windows_per_report(self) -> int:
        return 1 if self.latest_only else self.du_report_ms // self.kpm_log_ms

    @property
    def samples_per_report(self) -> int:
        return self.windows_per_report * len(SLICES)


@dataclass(frozen=True)
class KpmReport:
    report_seq: int
    samples: tuple[KpmSample, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))

    def windows(self) -> list[dict[SliceId, KpmSample]]:
        """Group samples by window end, oldest first."""
        by_end: dict[int, dict[SliceId, KpmSample]] = {}
        for s in self.samples:
            by_end.setdefault(s.window_end, {})[s.slice] = s
        return [by_end[k] for k in sorted(by_end)]


@dataclass(frozen=True)
class Control:
    action_seq: int
    directive: ControlDirective


@dataclass(frozen=True)
class ControlAck:
    action_seq: int
    accepted: bool


@dataclass(frozen=True)
class Error:
    code: str
    detail: str = ""


E2Message = Union[Subscribe, KpmReport, Control, ControlAck, Error]

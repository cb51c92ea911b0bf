"""Scenario files: where UEs are, how fast they move, and what they send."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from ..ransim import (
    DEFAULT_ALLOCATION,
    SLICES,
    TRAFFIC_PROFILES,
    RanWorld,
    Scheduler,
    SliceId,
    TrafficProfile,
    is_feasible,
)
from ..ric.timers import TIMER_SETS, TimerSet

RADII_M = (50.0, 20.0)
SPEEDS_MPS = (0.0, 3.0)

_KEYS = {
    "radius_m", "ue_counts", "speed_mps", "profile", "timer_set", "duration_s", "seed",
    "fading_sigma_db", "allocation", "scheds", "traffic",
}


class ScenarioError(ValueError):
    code = "scenario_error"


@dataclass(frozen=True)
class ScenarioConfig:
    radius_m: float = 50.0
    ue_counts: Mapping[str, int] = field(default_factory=lambda: {"embb": 2, "mmtc": 2, "urllc": 2})
    speed_mps: float = 0.0
    profile: int = 1
    timer_set: int = 1
    duration_s: float = 60.0
    seed: int = 0
    fading_sigma_db: float = 0.0
    # Control in force at t = 0, and for the whole run when no xApp is dispatched.
    allocation: tuple[int, int, int] = DEFAULT_ALLOCATION
    scheds: Mapping[str, str] = field(default_factory=lambda: {"embb": "RR", "mmtc": "RR", "urllc": "RR"})
    # Per-slice source rate overrides in bit/s, applied on top of the profile.
    traffic: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if float(self.radius_m) not in RADII_M:
            raise ScenarioError(f"radius_m must be one of {RADII_M}, got {self.radius_m}")
        if float(self.speed_mps) not in SPEEDS_MPS:
            raise ScenarioError(f"speed_mps must be one of {SPEEDS_MPS}, got {self.speed_mps}")
        if self.profile not in TRAFFIC_PROFILES:
            raise ScenarioError(f"unknown traffic profile {self.profile!r}")
        if self.timer_set not in TIMER_SETS:
            raise ScenarioError(f"unknown timer set {self.timer_set!r}")
        if not self.duration_s > 0:
            raise ScenarioError("duration_s must be positive")
        if abs(self.duration_s * 1000 - round(self.duration_s * 1000)) > 1e-9:
            raise ScenarioError("duration_s must be a whole number of milliseconds")

        counts = {}
        for k, v in dict(self.ue_counts).items():
            label = _slice_label(k)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ScenarioError(f"ue_counts[{label}] must be a non-negative integer")
            counts[label] = v
        if not any(counts.values()):
            raise ScenarioError("at least one slice needs a UE")
        object.__setattr__(self, "ue_counts", {s.label: counts.get(s.label, 0) for s in SLICES})

        alloc = tuple(int(x) for x in self.allocation)
        if not is_feasible(alloc):
            raise ScenarioError(f"allocation {alloc} is not a feasible slicing row")
        object.__setattr__(self, "allocation", alloc)

        scheds = {s.label: "RR" for s in SLICES}
        for k, v in dict(self.scheds).items():
            try:
                scheds[_slice_label(k)] = Scheduler.parse(v).name
            except (AttributeError, KeyError, ValueError):
                raise ScenarioError(f"unknown scheduler {v!r}") from None
        object.__setattr__(self, "scheds", scheds)

        traffic = {}
        for k, v in dict(self.traffic).items():
            if float(v) < 0:
                raise ScenarioError("traffic rates must be non-negative")
            traffic[_slice_label(k)] = float(v)
        object.__setattr__(self, "traffic", dict(sorted(traffic.items())))

    # ------------------------------------------------------------------ derived
    @property
    def duration_ms(self) -> int:
        return int(round(self.duration_s * 1000))

    @property
    def timers(self) -> TimerSet:
        return TIMER_SETS[self.timer_set]

    def traffic_profile(self) -> TrafficProfile:
        base = TRAFFIC_PROFILES[self.profile]
        rates = [self.traffic.get(s.label, base.rate(s)) for s in SLICES]
        return TrafficProfile(*rates)

    def build_world(self, record_grants: bool = False) -> RanWorld:
        return RanWorld(
            {SliceId.parse(k): v for k, v in self.ue_counts.items()},
            radius_m=self.radius_m,
            speed_mps=self.speed_mps,
            profile=self.traffic_profile(),
            seed=self.seed,
            fading_sigma_db=self.fading_sigma_db,
            allocation=self.allocation,
            scheds={SliceId.parse(k): Scheduler.parse(v) for k, v in self.scheds.items()},
            record_grants=record_grants,
        )

    def with_(self, **changes: Any) -> "ScenarioConfig":
        return replace(self, **changes)

    # ------------------------------------------------------------ serialization
    def to_obj(self) -> dict[str, Any]:
        o = asdict(self)
        o["allocation"] = list(self.allocation)
        o["radius_m"] = float(self.radius_m)
        o["speed_mps"] = float(self.speed_mps)
        o["duration_s"] = float(self.duration_s)
        o["fading_sigma_db"] = float(self.fading_sigma_db)
        return o

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    @classmethod
    def from_obj(cls, o: Mapping[str, Any]) -> "ScenarioConfig":
        if not isinstance(o, Mapping):
            raise ScenarioError("scenario must be a JSON object")
        extra = set(o) - _KEYS
        if extra:
            raise ScenarioError(f"unknown scenario keys {sorted(extra)}")
        kw = dict(o)
        if "allocation" in kw:
            kw["allocation"] = tuple(kw["allocation"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ScenarioError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from None
        return cls.from_obj(obj)

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _slice_label(name: Any) -> str:
    try:
        return SliceId.parse(name).label
    except (AttributeError, KeyError, ValueError):
        raise ScenarioError(f"unknown slice {name!r}") from None

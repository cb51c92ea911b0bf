"""Telemetry and control timers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TimerSet:
    du_report: int  # ms between KPM reports sent by the DU
    kpm_log: int  # ms covered by one KPM log window
    action_update: int  # ms between agent decisions

    def __post_init__(self) -> None:
        if min(self.du_report, self.kpm_log, self.action_update) <= 0:
            raise ValueError("timer periods must be positive")
        if self.kpm_log > self.du_report or self.du_report % self.kpm_log:
            raise ValueError("du_report must be a whole multiple of kpm_log")
        if self.action_update < self.kpm_log:
            raise ValueError("action_update must not be shorter than kpm_log")

    def with_report(self, du_report: int) -> "TimerSet":
        return TimerSet(du_report, self.kpm_log, self.action_update)

    def to_obj(self) -> dict[str, int]:
        return {"du_report": self.du_report, "kpm_log": self.kpm_log, "action_update": self.action_update}


TIMER_SETS = {
    1: TimerSet(1000, 250, 250),
    2: TimerSet(250, 250, 250),
    3: TimerSet(100, 100, 100),
}

# Setup id -> (slicing xApp report period, scheduling xApp report period), in ms.
HIERARCHICAL_SETUPS = {
    1: (1000, 10000),
    2: (1000, 5000),
    3: (10000, 1000),
    4: (5000, 1000),
}

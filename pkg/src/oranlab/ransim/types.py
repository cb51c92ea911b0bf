"""Core value types shared by the simulator, the protocol and the RIC."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

TTI_MS = 1
TOTAL_PRBS = 50
PACKET_SIZE_BYTES = 125
PF_BETA = 0.1
BUFFER_CAP_BYTES = 500_000


class SliceId(enum.IntEnum):
    """Slice identifiers. The integer order is the layout of every per-slice vector."""

    EMBB = 0
    MMTC = 1
    URLLC = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: "str | SliceId") -> "SliceId":
        if isinstance(value, SliceId):
            return value
        try:
            return cls[value.upper()]
        except KeyError:
            raise ValueError(f"unknown slice {value!r}") from None


SLICES = (SliceId.EMBB, SliceId.MMTC, SliceId.URLLC)


class Scheduler(enum.IntEnum):
    """Per-slice MAC scheduling profile. Order RR < WF < PF fixes action ids."""

    RR = 0
    WF = 1
    PF = 2

    @classmethod
    def parse(cls, value: "str | Scheduler") -> "Scheduler":
        if isinstance(value, Scheduler):
            return value
        try:
            return cls[value.upper()]
        except KeyError:
            raise ValueError(f"unknown scheduler {value!r}") from None


# Rows in the order the slicing action ids follow: (eMBB, mMTC, URLLC) PRBs.
FEASIBLE_ALLOCATIONS: tuple[tuple[int, int, int], ...] = (
    (30, 9, 11),
    (30, 15, 5),
    (36, 9, 5),
    (24, 21, 5),
    (24, 15, 11),
    (18, 15, 17),
    (18, 9, 23),
    (18, 21, 11),
    (12, 27, 11),
    (12, 15, 23),
    (12, 9, 29),
    (6, 27, 17),
    (6, 39, 5),
    (6, 15, 29),
    (6, 9, 35),
    (36, 3, 11),
)

DEFAULT_ALLOCATION = (18, 15, 17)


def is_feasible(allocation: tuple[int, ...]) -> bool:
    return tuple(allocation) in FEASIBLE_ALLOCATIONS


@dataclass(frozen=True)
class TrafficProfile:
    """Per-slice source rates in bit/s.

    eMBB is a constant-bitrate source; mMTC and URLLC are Poisson packet sources
    whose mean equals the rate.
    """

    embb_bps: float
    mmtc_bps: float
    urllc_bps: float

    def __post_init__(self) -> None:
        if min(self.embb_bps, self.mmtc_bps, self.urllc_bps) < 0:
            raise ValueError("traffic rates must be non-negative")

    def rate(self, slice_id: SliceId) -> float:
        return (self.embb_bps, self.mmtc_bps, self.urllc_bps)[int(slice_id)]


TRAFFIC_PROFILES = {
    1: TrafficProfile(1e6, 30e3, 10e3),
    2: TrafficProfile(4e6, 44.6e3, 89.3e3),
}


@dataclass
class UeState:
    ue_id: int
    slice: SliceId
    position: np.ndarray
    speed: float = 0.0
    buffer: int = 0
    ewma_tput: float = 0.0
    cum_arrived: int = 0
    cum_served: int = 0
    cum_dropped: int = 0
    waypoint: np.ndarray | None = None
    # Bytes of the served stream not yet adding up to a full packet.
    pkt_progress: int = 0
    arrival_carry: int = 0
    cum_grants: int = 0

    @property
    def distance(self) -> float:
        return float(np.hypot(self.position[0], self.position[1]))

    def ledger_ok(self) -> bool:
        return self.cum_arrived == self.cum_served + self.cum_dropped + self.buffer


@dataclass(frozen=True)
class KpmSample:
    """One per-slice measurement window."""

    window_end: int
    slice: SliceId
    dl_buffer: int
    dl_brate: float
    dl_tx_pkts: int
    granted_prbs: int
    requested_prbs: int

    @property
    def prb_ratio(self) -> float:
        return prb_ratio(self.granted_prbs, self.requested_prbs)

    def kpi(self, name: str) -> float:
        if name == "dl_buffer":
            return float(self.dl_buffer)
        if name == "dl_brate":
            return self.dl_brate
        if name == "dl_tx_pkts":
            return float(self.dl_tx_pkts)
        if name == "prb_ratio":
            return self.prb_ratio
        raise KeyError(name)


def prb_ratio(granted: float, requested: float) -> float:
    """Granted over requested PRBs, clamped to [0, 1]; 1 when nothing was requested."""
    if requested <= 0:
        return 1.0
    return min(1.0, max(0.0, granted / requested))


SchedProfileMap = dict  # SliceId -> Scheduler, one entry per slice


def default_sched_map() -> dict[SliceId, Scheduler]:
    return {s: Scheduler.RR for s in SLICES}

"""Slice-level gNB simulator."""

from .channel import ChannelModel, base_rate_bits, efficiency_at
from .kpmcsv import KPM_CSV_HEADER, KpmCsvError, read_kpm_csv, write_kpm_csv
from .scheduler import RoundRobinState, pf_metric, schedule_slice
from .traffic import generate_arrivals
from .types import (
    DEFAULT_ALLOCATION,
    FEASIBLE_ALLOCATIONS,
    PACKET_SIZE_BYTES,
    SLICES,
    TOTAL_PRBS,
    TRAFFIC_PROFILES,
    KpmSample,
    Scheduler,
    SliceId,
    TrafficProfile,
    UeState,
    is_feasible,
    prb_ratio,
)
from .world import RanWorld, TtiCounters, sample_kpm, step_tti, update_mobility

__all__ = [
    "ChannelModel", "base_rate_bits", "efficiency_at", "KPM_CSV_HEADER", "KpmCsvError",
    "read_kpm_csv", "write_kpm_csv", "RoundRobinState", "pf_metric", "schedule_slice",
    "generate_arrivals", "DEFAULT_ALLOCATION", "FEASIBLE_ALLOCATIONS", "PACKET_SIZE_BYTES",
    "SLICES", "TOTAL_PRBS", "TRAFFIC_PROFILES", "KpmSample", "Scheduler", "SliceId",
    "TrafficProfile", "UeState", "is_feasible", "prb_ratio", "RanWorld", "TtiCounters",
    "sample_kpm", "step_tti", "update_mobility",
]

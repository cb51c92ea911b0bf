"""TTI-level simulator of one gNB serving the three slices."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channel import ChannelModel
from .scheduler import RoundRobinState, schedule_slice
from .traffic import generate_arrivals
from .types import (
    BUFFER_CAP_BYTES,
    DEFAULT_ALLOCATION,
    PACKET_SIZE_BYTES,
    PF_BETA,
    SLICES,
    TOTAL_PRBS,
    TTI_MS,
    TRAFFIC_PROFILES,
    KpmSample,
    Scheduler,
    SliceId,
    TrafficProfile,
    UeState,
    default_sched_map,
    is_feasible,
)

log = logging.getLogger(__name__)


@dataclass
class TtiCounters:
    """What happened in one TTI, per slice (indexed by SliceId)."""

    tti: int
    arrived: list[int]
    served: list[int]
    tx_pkts: list[int]
    granted: list[int]
    requested: list[int]
    buffer: list[int]


def _uniform_in_disk(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random())
    theta = 2.0 * np.pi * rng.random()
    return np.array([r * np.cos(theta), r * np.sin(theta)])


class RanWorld:
    """State of the cell: UEs, current control, and the per-TTI history.

    Every random stream is derived from ``seed`` per UE and per purpose, so two
    worlds built from the same arguments produce bit-identical histories, and
    changing the control of one slice does not perturb another slice's traffic.
    """

    def __init__(
        self,
        ue_counts: Mapping[SliceId, int] | None = None,
        *,
        radius_m: float = 50.0,
        speed_mps: float = 0.0,
        profile: TrafficProfile | None = None,
        seed: int = 0,
        fading_sigma_db: float = 0.0,
        allocation: tuple[int, int, int] = DEFAULT_ALLOCATION,
        scheds: Mapping[SliceId, Scheduler] | None = None,
        buffer_cap: int = BUFFER_CAP_BYTES,
        record_grants: bool = False,
    ) -> None:
        counts = {s: 2 for s in SLICES} if ue_counts is None else dict(ue_counts)
        if speed_mps < 0:
            raise ValueError("speed must be non-negative")
        if not is_feasible(tuple(allocation)):
            raise ValueError(f"infeasible initial allocation {allocation}")
        self.radius_m = float(radius_m)
        self.profile = profile or TRAFFIC_PROFILES[1]
        self.channel = ChannelModel(seed=seed, fading_sigma_db=fading_sigma_db)
        self.buffer_cap = int(buffer_cap)
        self.allocation: tuple[int, int, int] = tuple(allocation)  # type: ignore[assignment]
        self.scheds: dict[SliceId, Scheduler] = default_sched_map()
        if scheds:
            self.scheds.update({SliceId(k): Scheduler(v) for k, v in scheds.items()})

        self.ues: list[UeState] = []
        self._traffic_rng: list[np.random.Generator] = []
        self._mobility_rng: list[np.random.Generator] = []
        ue_id = 0
        for s in SLICES:
            for _ in range(counts.get(s, 0)):
                t_ss, m_ss = np.random.SeedSequence([int(seed), ue_id]).spawn(2)
                mrng = np.random.default_rng(m_ss)
                pos = _uniform_in_disk(mrng, self.radius_m)
                ue = UeState(ue_id=ue_id, slice=s, position=pos, speed=float(speed_mps))
                ue.waypoint = _uniform_in_disk(mrng, self.radius_m)
                self.ues.append(ue)
                self._traffic_rng.append(np.random.default_rng(t_ss))
                self._mobility_rng.append(mrng)
                ue_id += 1
        self.by_slice: dict[SliceId, list[int]] = {
            s: [i for i, ue in enumerate(self.ues) if ue.slice is s] for s in SLICES
        }
        self._rr = {s: RoundRobinState() for s in SLICES}

        self.now = 0
        # Cumulative per-slice counters; index k holds totals after k TTIs.
        self._cum = {
            key: {s: [0] for s in SLICES}
            for key in ("served", "pkts", "granted", "requested")
        }
        self._buffer_hist = {s: [0] for s in SLICES}
        self.events: list[dict] = []
        self.grant_log: list[tuple] | None = [] if record_grants else None

    # ----------------------------------------------------------------- control
    def apply_control(
        self,
        slicing: tuple[int, int, int] | None = None,
        scheds: Mapping[SliceId, Scheduler] | None = None,
    ) -> bool:
        """Apply a control request. Infeasible slicing is rejected and logged;
        scheduler changes in the same request still take effect."""
        accepted = True
        if slicing is not None:
            triple = tuple(int(x) for x in slicing)
            if is_feasible(triple):
                self.allocation = triple  # type: ignore[assignment]
            else:
                accepted = False
                self.events.append(
                    {"tti": self.now, "event": "slicing_rejected", "allocation": list(triple)}
                )
                log.warning("rejected infeasible slicing %s at tti %d", triple, self.now)
        if scheds:
            for s, p in scheds.items():
                self.scheds[SliceId(s)] = Scheduler(p)
        return accepted

    # -------------------------------------------------------------- dynamics
    def update_mobility(self, dt_ms: int) -> None:
        """Random-waypoint step: move each UE toward its waypoint at its speed."""
        for ue, rng in zip(self.ues, self._mobility_rng):
            if ue.speed <= 0:
                continue
            step = ue.speed * dt_ms / 1000.0
            delta = ue.waypoint - ue.position
            dist = float(np.hypot(delta[0], delta[1]))
            if dist <= step:
                ue.position = ue.waypoint.copy()
                ue.waypoint = _uniform_in_disk(rng, self.radius_m)
            else:
                ue.position = ue.position + delta * (step / dist)

    def step(self) -> TtiCounters:
        """Advance one TTI under the current allocation and scheduler map."""
        tti = self.now
        arrived = [0, 0, 0]
        served = [0, 0, 0]
        pkts = [0, 0, 0]
        granted = [0, 0, 0]
        requested = [0, 0, 0]

        for i, ue in enumerate(self.ues):
            new = generate_arrivals(self.profile, ue, TTI_MS, self._traffic_rng[i])
            ue.cum_arrived += new
            room = self.buffer_cap - ue.buffer
            if new > room:
                keep = room if ue.slice is SliceId.EMBB else room - room % PACKET_SIZE_BYTES
                ue.cum_dropped += new - keep
                new = keep
            ue.buffer += new
            arrived[ue.slice] += new

        for s in SLICES:
            idx = self.by_slice[s]
            if not idx:
                continue
            ues = [self.ues[i] for i in idx]
            rates = [self.channel.per_prb_rate(ue, tti) for ue in ues]
            for ue, r in zip(ues, rates):
                requested[s] += min(TOTAL_PRBS, -(-ue.buffer * 8 // r))
            trace = None
            if self.grant_log is not None:
                log_ = self.grant_log
                policy = self.scheds[s]
                ewmas = {ue.ue_id: ue.ewma_tput for ue in ues}
                rate_map = {ue.ue_id: r for ue, r in zip(ues, rates)}

                def trace(chosen, backlog, metrics, _s=s, _p=policy, _e=ewmas, _r=rate_map):
                    log_.append((tti, _s, _p, chosen, backlog, _r, _e))

            grants = schedule_slice(
                self.scheds[s], ues, self.allocation[s], rates, self._rr[s], trace
            )
            for ue, g, r in zip(ues, grants, rates):
                out = min(ue.buffer, g * r // 8)
                ue.buffer -= out
                ue.cum_served += out
                ue.cum_grants += g
                ue.pkt_progress += out
                done, ue.pkt_progress = divmod(ue.pkt_progress, PACKET_SIZE_BYTES)
                ue.ewma_tput = (1.0 - PF_BETA) * ue.ewma_tput + PF_BETA * (out * 8 * 1000.0 / TTI_MS)
                served[s] += out
                pkts[s] += done
                granted[s] += g

        self.update_mobility(TTI_MS)
        self.now += 1
        buffers = [0, 0, 0]
        for ue in self.ues:
            buffers[ue.slice] += ue.buffer
        for s in SLICES:
            c = self._cum
            c["served"][s].append(c["served"][s][-1] + served[s])
            c["pkts"][s].append(c["pkts"][s][-1] + pkts[s])
            c["granted"][s].append(c["granted"][s][-1] + granted[s])
            c["requested"][s].append(c["requested"][s][-1] + requested[s])
            self._buffer_hist[s].append(buffers[s])
        return TtiCounters(tti, arrived, served, pkts, granted, requested, buffers)

    def run(self, n_tti: int) -> None:
        for _ in range(n_tti):
            self.step()

    # ------------------------------------------------------------ telemetry
    def sample_kpm(self, start_ms: int, end_ms: int) -> list[KpmSample]:
        """Per-slice KPMs over the TTIs in ``[start_ms, end_ms)``."""
        if not 0 <= start_ms < end_ms <= self.now:
            raise ValueError(f"window [{start_ms}, {end_ms}) outside simulated range")
        span_s = (end_ms - start_ms) / 1000.0
        out = []
        c = self._cum
        for s in SLICES:
            served = c["served"][s][end_ms] - c["served"][s][start_ms]
            out.append(
                KpmSample(
                    window_end=end_ms,
                    slice=s,
                    dl_buffer=self._buffer_hist[s][end_ms],
                    dl_brate=served * 8 / span_s / 1e6,
                    dl_tx_pkts=c["pkts"][s][end_ms] - c["pkts"][s][start_ms],
                    granted_prbs=c["granted"][s][end_ms] - c["granted"][s][start_ms],
                    requested_prbs=c["requested"][s][end_ms] - c["requested"][s][start_ms],
                )
            )
        return out


def step_tti(
    world: RanWorld,
    slicing: tuple[int, int, int] | None = None,
    scheds: Mapping[SliceId, Scheduler] | None = None,
) -> TtiCounters:
    """Apply any control and advance ``world`` by one TTI."""
    if slicing is not None or scheds:
        world.apply_control(slicing, scheds)
    return world.step()


def sample_kpm(world: RanWorld, start_ms: int, end_ms: int) -> list[KpmSample]:
    return world.sample_kpm(start_ms, end_ms)


def update_mobility(world: RanWorld, dt_ms: int) -> None:
    world.update_mobility(dt_ms)

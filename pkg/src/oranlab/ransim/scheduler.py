"""Intra-slice MAC schedulers: round robin, water filling and proportional fair.

All three hand out PRBs one at a time to backlogged UEs only. A UE is
backlogged while the PRBs granted so far in this TTI are fewer than it needs
to drain its buffer. Ties always go to the lowest ``ue_id``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .types import Scheduler, UeState

# (ue_id chosen, ue_ids backlogged at that moment, metric per backlogged ue_id)
GrantTrace = Callable[[int, tuple[int, ...], dict[int, float]], None]


@dataclass
class RoundRobinState:
    """Persistent RR pointer: index into the slice's UE list of the next UE to consider."""

    pointer: int = 0


def prbs_needed(buffer_bytes: int, rate_bits: int) -> int:
    if buffer_bytes <= 0:
        return 0
    return -(-buffer_bytes * 8 // rate_bits)


def pf_metric(rate_bits: int, ewma_tput: float) -> float:
    # ewma floored at 1 bit/s so idle UEs get a finite, very large priority
    return rate_bits / max(ewma_tput, 1.0)


def schedule_slice(
    policy: Scheduler,
    ues: Sequence[UeState],
    prb_budget: int,
    rates: Sequence[int],
    rr_state: RoundRobinState | None = None,
    trace: GrantTrace | None = None,
) -> list[int]:
    """Split ``prb_budget`` PRBs among ``ues`` (all from one slice).

    ``rates[i]`` is the per-PRB rate in bits of ``ues[i]`` for this TTI. The
    returned grants align with ``ues``; they never exceed what each UE needs,
    so the sum may be below the budget when demand is low.
    """
    if prb_budget < 0:
        raise ValueError("prb_budget must be non-negative")
    n = len(ues)
    grants = [0] * n
    if n == 0 or prb_budget == 0:
        return grants
    need = [prbs_needed(ue.buffer, r) for ue, r in zip(ues, rates)]

    if policy is Scheduler.RR:
        state = rr_state if rr_state is not None else RoundRobinState()
        for _ in range(prb_budget):
            chosen = -1
            for k in range(n):
                i = (state.pointer + k) % n
                if need[i] > 0:
                    chosen = i
                    break
            if chosen < 0:
                break
            if trace is not None:
                backlog = tuple(ues[i].ue_id for i in range(n) if need[i] > 0)
                trace(ues[chosen].ue_id, backlog, {})
            grants[chosen] += 1
            need[chosen] -= 1
            state.pointer = (chosen + 1) % n
        return grants

    if policy is Scheduler.WF:
        metric = [float(r) for r in rates]
    elif policy is Scheduler.PF:
        metric = [pf_metric(r, ue.ewma_tput) for ue, r in zip(ues, rates)]
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown scheduler {policy!r}")

    # The metric is frozen for the TTI, so PRB-by-PRB argmax reduces to
    # serving UEs in metric order until each is drained or the budget ends.
    order = sorted(range(n), key=lambda i: (-metric[i], ues[i].ue_id))
    left = prb_budget
    for i in order:
        if left == 0:
            break
        take = min(need[i], left)
        if take <= 0:
            continue
        if trace is not None:
            for _ in range(take):
                backlog = tuple(ues[j].ue_id for j in range(n) if need[j] > 0)
                trace(ues[i].ue_id, backlog, {ues[j].ue_id: metric[j] for j in range(n)})
                need[i] -= 1
        else:
            need[i] -= take
        grants[i] += take
        left -= take
    return grants

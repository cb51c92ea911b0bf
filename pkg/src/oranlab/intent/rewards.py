"""Reward primitives, the weighted global reward, and weight design."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..ransim.types import SLICES, KpmSample, SliceId, prb_ratio
from .spec import IntentError, IntentSpec, UnknownReward


def slice_reward(
    primitive: str,
    values: Sequence[float] | Sequence[tuple[float, float]],
    direction: str = "max",
) -> float:
    """Reward of one slice over a window of KPI values.

    For ``MaxPrbRatioReward`` the values are ``(granted, requested)`` pairs and
    the result is the ratio of their sums.
    """
    if len(values) == 0:
        raise ValueError("empty value window")
    if primitive == "MaxAverageReward":
        r = sum(values) / len(values)  # type: ignore[arg-type]
    elif primitive == "MaxElemReward":
        r = max(values)  # type: ignore[type-var]
    elif primitive == "MaxPrbRatioReward":
        granted = sum(g for g, _ in values)  # type: ignore[misc]
        requested = sum(q for _, q in values)  # type: ignore[misc]
        r = prb_ratio(granted, requested)
    else:
        raise UnknownReward(f"unknown reward primitive {primitive!r}")
    if direction == "min":
        return -float(r)
    if direction != "max":
        raise ValueError(f"direction must be 'max' or 'min', got {direction!r}")
    return float(r)


def global_reward(slice_rewards: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted sum of per-slice rewards for one decision step."""
    if len(slice_rewards) != len(weights):
        raise ValueError(f"{len(slice_rewards)} rewards for {len(weights)} weights")
    total = 0.0
    for w, r in zip(weights, slice_rewards):
        total += w * r
    return total


def derive_weight(priority: float, scale_ref: float, direction: str = "maximize") -> float:
    if scale_ref <= 0:
        raise ValueError("scale reference must be positive")
    w = priority / scale_ref
    if direction in ("minimize", "min"):
        return -w
    if direction not in ("maximize", "max"):
        raise ValueError(f"unknown direction {direction!r}")
    return w


@dataclass(frozen=True)
class WeightDesign:
    """Weights as priority over a typical magnitude of the rewarded KPI.

    ``A`` is in Mbps, ``B`` in packets per window, ``C`` in bytes.
    """

    alpha: float = 1000.0
    beta: float = 456.0
    gamma_urllc: float = 1.0
    A: float = 13.88
    B: float = 304.0
    C: float = 20186.0
    directions: tuple[str, str, str] = ("maximize", "maximize", "minimize")

    def __post_init__(self) -> None:
        if min(self.A, self.B, self.C) <= 0:
            raise ValueError("scale references must be positive")

    def weights(self) -> tuple[float, float, float]:
        pri = (self.alpha, self.beta, self.gamma_urllc)
        refs = (self.A, self.B, self.C)
        return tuple(derive_weight(p, r, d) for p, r, d in zip(pri, refs, self.directions))  # type: ignore[return-value]


# Tabulated configurations (eMBB, mMTC, URLLC); these are used as-is rather
# than recomputed from WeightDesign, whose eMBB value differs in the 4th digit.
DEFAULT_WEIGHTS = (72.0440333, 0.229357798, -0.00005)
ALTERNATIVE_WEIGHTS = (72.0440333, 1.5, -0.00005)
WEIGHT_CONFIGS = {"default": DEFAULT_WEIGHTS, "alternative": ALTERNATIVE_WEIGHTS}


class RewardFunction:
    """Global reward of an intent, computed from KPM windows.

    Each window maps slice to its sample. A slice reward naming several KPIs
    is the sum of the primitive applied to each KPI separately.
    """

    def __init__(self, intent: IntentSpec):
        self.intent = intent

    def slice_rewards(self, windows: Sequence[Mapping[SliceId, KpmSample]]) -> list[float]:
        if not windows:
            raise ValueError("no windows to score")
        out = []
        for s in self.intent.slices:
            samples = [w[s.name] for w in windows]
            if s.reward == "MaxPrbRatioReward":
                pairs = [(x.granted_prbs, x.requested_prbs) for x in samples]
                out.append(slice_reward(s.reward, pairs, s.direction))
                continue
            out.append(
                sum(
                    slice_reward(s.reward, [x.kpi(k) for x in samples], s.direction)
                    for k in s.reward_kpis
                )
            )
        return out

    def __call__(self, windows: Sequence[Mapping[SliceId, KpmSample]]) -> float:
        return global_reward(self.slice_rewards(windows), self.intent.global_reward_weights)


def weights_for(slices: Sequence[SliceId], config: str = "default") -> list[float]:
    """Pick the weights of ``slices`` out of a named configuration."""
    try:
        table = WEIGHT_CONFIGS[config]
    except KeyError:
        raise IntentError(f"unknown weight configuration {config!r}") from None
    return [table[SLICES.index(SliceId.parse(s))] for s in slices]

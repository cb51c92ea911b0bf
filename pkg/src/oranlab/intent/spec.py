"""Training intents: JSON documents naming slices, rewards, KPIs and actions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

from ..ransim.types import SliceId

KPI_NAMES = ("dl_buffer", "dl_brate", "dl_tx_pkts", "prb_ratio")
ACTION_KINDS = ("scheduling", "ran_slicing")
REWARD_PRIMITIVES = ("MaxAverageReward", "MaxElemReward", "MaxPrbRatioReward")
GLOBAL_REWARD_TYPES = ("NestedSumWeightedReward",)

# Pre-configured per-slice settings, used for any key a slice entry omits.
SLICE_PRESETS: dict[SliceId, dict[str, Any]] = {
    SliceId.EMBB: {
        "reward": "MaxAverageReward",
        "reward_KPIs": ["dl_brate"],
        "observation_KPIs": ["dl_buffer", "dl_tx_pkts"],
    },
    SliceId.MMTC: {
        "reward": "MaxAverageReward",
        "reward_KPIs": ["dl_tx_pkts"],
        "observation_KPIs": ["dl_brate", "dl_tx_pkts"],
    },
    SliceId.URLLC: {
        "reward": "MaxElemReward",
        "reward_KPIs": ["dl_buffer"],
        "observation_KPIs": ["dl_buffer", "dl_brate"],
    },
}


class IntentError(ValueError):
    code = "intent_error"


class MalformedIntent(IntentError):
    code = "malformed_json"


class IntentSchemaError(IntentError):
    code = "schema_error"


class UnknownReward(IntentError):
    code = "unknown_reward"


class WeightMismatch(IntentError):
    code = "weight_mismatch"


class DuplicateSlice(IntentError):
    code = "duplicate_slice"


class UnknownSlice(IntentError):
    code = "unknown_slice"


class UnknownKpi(IntentError):
    code = "unknown_kpi"


class UnknownAction(IntentError):
    code = "unknown_action"


@dataclass(frozen=True)
class SliceIntent:
    name: SliceId
    reward: str
    reward_kpis: tuple[str, ...]
    observation_kpis: tuple[str, ...]
    # "max" or "min". Minimizing is usually expressed with a negative weight;
    # this flag negates the slice reward itself instead.
    direction: str = "max"


@dataclass(frozen=True)
class IntentSpec:
    slices: tuple[SliceIntent, ...]
    action_kinds: frozenset[str]
    global_reward_type: str
    global_reward_weights: tuple[float, ...]

    @property
    def slice_ids(self) -> tuple[SliceId, ...]:
        return tuple(s.name for s in self.slices)

    def to_dict(self) -> dict[str, Any]:
        return {
            "intent": {
                "slices": [
                    {
                        "name": s.name.label,
                        "reward": s.reward,
                        "reward_KPIs": list(s.reward_kpis),
                        "observation_KPIs": list(s.observation_kpis),
                        **({"direction": s.direction} if s.direction != "max" else {}),
                    }
                    for s in self.slices
                ],
                "actions": sorted(self.action_kinds),
                "global_reward_type": self.global_reward_type,
                "global_reward_weights": list(self.global_reward_weights),
            }
        }


def _kpi_list(raw: Any, where: str) -> tuple[str, ...]:
    if not isinstance(raw, list) or not all(isinstance(k, str) for k in raw):
        raise IntentSchemaError(f"{where} must be a list of KPI names")
    for k in raw:
        if k not in KPI_NAMES:
            raise UnknownKpi(f"{where}: unknown KPI {k!r}")
    return tuple(raw)


def _parse_slice(raw: Any, index: int) -> SliceIntent:
    if not isinstance(raw, dict):
        raise IntentSchemaError(f"slices[{index}] must be an object")
    name = raw.get("name")
    if not isinstance(name, str):
        raise IntentSchemaError(f"slices[{index}].name must be a string")
    try:
        slice_id = SliceId.parse(name)
    except ValueError:
        raise UnknownSlice(f"slices[{index}]: unknown slice {name!r}") from None
    if name != slice_id.label:
        raise UnknownSlice(f"slices[{index}]: slice names are lowercase, got {name!r}")
    preset = SLICE_PRESETS[slice_id]
    reward = raw.get("reward", preset["reward"])
    if reward not in REWARD_PRIMITIVES:
        raise UnknownReward(f"slices[{index}]: unknown reward {reward!r}")
    reward_kpis = _kpi_list(raw.get("reward_KPIs", preset["reward_KPIs"]), f"slices[{index}].reward_KPIs")
    if not reward_kpis:
        raise IntentSchemaError(f"slices[{index}].reward_KPIs must not be empty")
    obs = _kpi_list(raw.get("observation_KPIs", preset["observation_KPIs"]), f"slices[{index}].observation_KPIs")
    direction = raw.get("direction", "max")
    if direction not in ("max", "min"):
        raise IntentSchemaError(f"slices[{index}].direction must be 'max' or 'min'")
    extra = set(raw) - {"name", "reward", "reward_KPIs", "observation_KPIs", "direction"}
    if extra:
        raise IntentSchemaError(f"slices[{index}]: unexpected keys {sorted(extra)}")
    return SliceIntent(slice_id, reward, reward_kpis, obs, direction)


def parse_intent_obj(doc: Any) -> IntentSpec:
    if not isinstance(doc, dict) or not isinstance(doc.get("intent"), dict):
        raise IntentSchemaError("document must be an object with an 'intent' object")
    body = doc["intent"]
    raw_slices = body.get("slices")
    if not isinstance(raw_slices, list) or not 1 <= len(raw_slices) <= 3:
        raise IntentSchemaError("intent.slices must list 1 to 3 slices")
    slices = tuple(_parse_slice(s, i) for i, s in enumerate(raw_slices))
    seen: set[SliceId] = set()
    for s in slices:
        if s.name in seen:
            raise DuplicateSlice(f"slice {s.name.label!r} listed twice")
        seen.add(s.name)

    actions = body.get("actions")
    if not isinstance(actions, list) or not actions:
        raise IntentSchemaError("intent.actions must be a non-empty list")
    for a in actions:
        if a not in ACTION_KINDS:
            raise UnknownAction(f"unknown action kind {a!r}")

    reward_type = body.get("global_reward_type", GLOBAL_REWARD_TYPES[0])
    if reward_type not in GLOBAL_REWARD_TYPES:
        raise UnknownReward(f"unknown global reward type {reward_type!r}")

    weights = body.get("global_reward_weights")
    if not isinstance(weights, list) or not all(
        isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
    ):
        raise IntentSchemaError("intent.global_reward_weights must be a list of numbers")
    if len(weights) != len(slices):
        raise WeightMismatch(f"{len(weights)} weights for {len(slices)} slices")
    extra = set(body) - {"slices", "actions", "global_reward_type", "global_reward_weights"}
    if extra:
        raise IntentSchemaError(f"intent: unexpected keys {sorted(extra)}")
    return IntentSpec(slices, frozenset(actions), reward_type, tuple(float(w) for w in weights))


def parse_intent(text: str | bytes) -> IntentSpec:
    """Parse and validate an intent document."""
    try:
        doc = json.loads(text)
    except (ValueError, TypeError) as exc:
        raise MalformedIntent(f"intent is not valid JSON: {exc}") from None
    return parse_intent_obj(doc)


def make_intent(
    slices: Sequence[SliceId | str],
    actions: Sequence[str],
    weights: Sequence[float],
) -> IntentSpec:
    """Build an intent from the per-slice presets."""
    doc = {
        "intent": {
            "slices": [{"name": SliceId.parse(s).label} for s in slices],
            "actions": list(actions),
            "global_reward_weights": list(weights),
        }
    }
    return parse_intent_obj(doc)

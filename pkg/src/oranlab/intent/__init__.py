"""Intent parsing, action spaces and reward construction."""

from .actions import (
    ActionKind,
    ActionSpace,
    UnsupportedPrbTotal,
    build_action_space,
    scheduling_actions,
    slicing_actions,
)
from .rewards import (
    ALTERNATIVE_WEIGHTS,
    DEFAULT_WEIGHTS,
    WEIGHT_CONFIGS,
    RewardFunction,
    WeightDesign,
    derive_weight,
    global_reward,
    slice_reward,
    weights_for,
)
from .spec import (
    ACTION_KINDS,
    KPI_NAMES,
    REWARD_PRIMITIVES,
    SLICE_PRESETS,
    DuplicateSlice,
    IntentError,
    IntentSchemaError,
    IntentSpec,
    MalformedIntent,
    SliceIntent,
    UnknownAction,
    UnknownKpi,
    UnknownReward,
    UnknownSlice,
    WeightMismatch,
    make_intent,
    parse_intent,
    parse_intent_obj,
)

__all__ = [
    "ACTION_KINDS", "ALTERNATIVE_WEIGHTS", "ActionKind", "ActionSpace", "DEFAULT_WEIGHTS",
    "DuplicateSlice", "IntentError", "IntentSchemaError", "IntentSpec", "KPI_NAMES",
    "MalformedIntent", "REWARD_PRIMITIVES", "RewardFunction", "SLICE_PRESETS", "SliceIntent",
    "UnknownAction", "UnknownKpi", "UnknownReward", "UnknownSlice", "UnsupportedPrbTotal",
    "WEIGHT_CONFIGS", "WeightDesign", "WeightMismatch", "build_action_space", "derive_weight",
    "global_reward", "make_intent", "parse_intent", "parse_intent_obj", "scheduling_actions",
    "slice_reward", "slicing_actions", "weights_for",
]

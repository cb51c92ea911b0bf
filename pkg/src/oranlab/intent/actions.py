"""Discrete action spaces. An action id is an index into ``ActionSpace.actions``."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable

from ..e2.messages import ControlDirective
from ..ransim.types import FEASIBLE_ALLOCATIONS, SLICES, TOTAL_PRBS, Scheduler, SliceId
from .spec import IntentError


class UnsupportedPrbTotal(IntentError):
    code = "unsupported_total_prbs"


class ActionKind(str, enum.Enum):
    SLICING = "slicing"
    SCHEDULING = "scheduling"
    JOINT = "joint"


@dataclass(frozen=True)
class ActionSpace:
    kind: ActionKind
    actions: tuple[ControlDirective, ...]
    # Set when a scheduling space covers a single slice.
    slice: SliceId | None = None

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, action_id: int) -> ControlDirective:
        return self.actions[action_id]

    def index(self, directive: ControlDirective) -> int:
        return self.actions.index(directive)

    @property
    def parameters(self) -> frozenset[str]:
        """Names of the control parameters this space can set."""
        names: set[str] = set()
        for a in self.actions:
            names.update(a.parameters())
        return frozenset(names)


def slicing_actions() -> tuple[ControlDirective, ...]:
    return tuple(ControlDirective(slicing=row) for row in FEASIBLE_ALLOCATIONS)


def scheduling_actions(slice_id: SliceId | None = None) -> tuple[ControlDirective, ...]:
    if slice_id is not None:
        return tuple(ControlDirective(sched={slice_id: p}) for p in Scheduler)
    # itertools.product over (RR, WF, PF) with eMBB as the most significant digit.
    return tuple(
        ControlDirective(sched=dict(zip(SLICES, triple)))
        for triple in itertools.product(tuple(Scheduler), repeat=len(SLICES))
    )


def build_action_space(
    kinds: Iterable[str],
    total_prbs: int = TOTAL_PRBS,
    slice_id: SliceId | str | None = None,
) -> ActionSpace:
    """Action space for a set of intent action kinds (``scheduling``, ``ran_slicing``).

    Asking for both yields the joint space: the slicing directives followed by
    the scheduling directives, each leaving the other parameter untouched.
    ``slice_id`` restricts scheduling to one slice's profile.
    """
    kinds = frozenset(kinds)
    if total_prbs != TOTAL_PRBS:
        raise UnsupportedPrbTotal(f"only a {TOTAL_PRBS}-PRB carrier is supported, got {total_prbs}")
    unknown = kinds - {"scheduling", "ran_slicing"}
    if unknown or not kinds:
        raise IntentError(f"bad action kinds {sorted(kinds)}")
    sid = None if slice_id is None else SliceId.parse(slice_id)
    if kinds == {"ran_slicing"}:
        if sid is not None:
            raise IntentError("slicing acts on all slices at once")
        return ActionSpace(ActionKind.SLICING, slicing_actions())
    if kinds == {"scheduling"}:
        return ActionSpace(ActionKind.SCHEDULING, scheduling_actions(sid), sid)
    if sid is not None:
        raise IntentError("a joint space cannot be restricted to one slice")
    return ActionSpace(ActionKind.JOINT, slicing_actions() + scheduling_actions())

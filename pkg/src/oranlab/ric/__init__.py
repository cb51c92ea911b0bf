"""Near-real-time RIC: xApp descriptors, sessions, dispatch and the virtual clock."""

from .descriptor import (
    ActionSpaceMismatch,
    CorruptModel,
    Domain,
    OnboardError,
    UnknownIntent,
    XappDescriptor,
    domain_for_intent_actions,
    onboard_xapp,
)
from .eventlog import Event, EventLog
from .gnb import GnbNode
from .runtime import (
    DomainConflict,
    MergeResult,
    RicRuntime,
    check_disjoint,
    dispatch,
    merge_directives,
    run_virtual,
)
from .session import DomainViolation, XappSession
from .timers import HIERARCHICAL_SETUPS, TIMER_SETS, TimerSet

__all__ = [
    "ActionSpaceMismatch", "CorruptModel", "Domain", "OnboardError", "UnknownIntent",
    "XappDescriptor", "domain_for_intent_actions", "onboard_xapp", "Event", "EventLog",
    "GnbNode", "DomainConflict", "MergeResult", "RicRuntime", "check_disjoint", "dispatch",
    "merge_directives", "run_virtual", "DomainViolation", "XappSession", "HIERARCHICAL_SETUPS",
    "TIMER_SETS", "TimerSet",
]

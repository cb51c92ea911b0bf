"""Reference messages behind the checked-in ``proto-golden/`` corpus.

``python -m oranlab.e2.golden DIR`` rewrites the corpus; the files are frozen
in the repository and tests compare against the bytes on disk.
"""

from __future__ import annotations

import sys
from pathlib import Path

from ..ransim.types import KpmSample, Scheduler, SliceId
from .codec import encode_message
from .messages import Control, ControlAck, ControlDirective, Error, KpmReport, Subscribe


def _report() -> KpmReport:
    rows = [
        (250, SliceId.EMBB, 5120, 3.904, 976, 4500, 5210),
        (250, SliceId.MMTC, 0, 0.028, 7, 63, 63),
        (250, SliceId.URLLC, 125, 0.012, 3, 41, 44),
    ]
    return KpmReport(1, tuple(KpmSample(*r) for r in rows))


GOLDEN_MESSAGES = {
    "subscribe_set1": Subscribe(1000, 250),
    "subscribe_latest_only": Subscribe(250, 250, latest_only=True),
    "kpm_report_one_window": _report(),
    "kpm_report_empty": KpmReport(2, ()),
    "control_slicing": Control(1, ControlDirective(slicing=(30, 9, 11))),
    "control_joint": Control(
        2,
        ControlDirective(
            slicing=(18, 15, 17),
            sched={SliceId.EMBB: Scheduler.PF, SliceId.MMTC: Scheduler.RR, SliceId.URLLC: Scheduler.WF},
        ),
    ),
    "control_sched_mmtc": Control(3, ControlDirective(sched={SliceId.MMTC: Scheduler.WF})),
    "control_ack_7_true": ControlAck(7, True),
    "control_ack_8_false": ControlAck(8, False),
    "error_unknown_type": Error("protocol_error", "unknown message type 'bogus'"),
}


def write_goldens(directory: str | Path) -> list[Path]:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for name, msg in sorted(GOLDEN_MESSAGES.items()):
        path = root / f"{name}.bin"
        path.write_bytes(encode_message(msg))
        written.append(path)
    return written


if __name__ == "__main__":
    for p in write_goldens(sys.argv[1] if len(sys.argv) > 1 else "proto-golden"):
        print(p)

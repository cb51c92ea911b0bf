"""KPM CSV files: one row per slice per log window."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, Iterator

from .types import KpmSample, SliceId

KPM_CSV_HEADER = "ts_ms,slice,dl_buffer_bytes,dl_brate_mbps,dl_tx_pkts,granted_prbs,requested_prbs"
KPM_COLUMNS = tuple(KPM_CSV_HEADER.split(","))


class KpmCsvError(ValueError):
    """A KPM CSV does not follow the column contract."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


def format_row(sample: KpmSample) -> str:
    # repr() of a float round-trips exactly, which keeps summaries recomputable.
    return ",".join(
        (
            str(sample.window_end),
            sample.slice.label,
            str(sample.dl_buffer),
            repr(float(sample.dl_brate)),
            str(sample.dl_tx_pkts),
            str(sample.granted_prbs),
            str(sample.requested_prbs),
        )
    )


def dumps(samples: Iterable[KpmSample]) -> str:
    lines = [KPM_CSV_HEADER]
    lines.extend(format_row(s) for s in samples)
    return "\n".join(lines) + "\n"


def write_kpm_csv(path: str | Path, samples: Iterable[KpmSample]) -> None:
    Path(path).write_bytes(dumps(samples).encode("utf-8"))


def check_header(header: str) -> None:
    got = header.rstrip("\r\n").split(",")
    for i, want in enumerate(KPM_COLUMNS):
        if i >= len(got):
            raise KpmCsvError(f"missing column {want!r}", row=0, column=want)
        if got[i] != want:
            raise KpmCsvError(
                f"column {i} is {got[i]!r}, expected {want!r}", row=0, column=got[i]
            )
    if len(got) > len(KPM_COLUMNS):
        raise KpmCsvError(f"unexpected column {got[len(KPM_COLUMNS)]!r}", row=0,
                          column=got[len(KPM_COLUMNS)])


def _parse_line(line: str, row: int) -> KpmSample:
    cells = line.split(",")
    if len(cells) != len(KPM_COLUMNS):
        raise KpmCsvError(f"row {row}: expected {len(KPM_COLUMNS)} cells, got {len(cells)}", row=row)
    values = []
    for col, cell in zip(KPM_COLUMNS, cells):
        try:
            if col == "slice":
                values.append(SliceId.parse(cell))
            elif col == "dl_brate_mbps":
                values.append(float(cell))
            else:
                values.append(int(cell))
        except ValueError:
            raise KpmCsvError(f"row {row}, column {col!r}: bad value {cell!r}", row=row, column=col) from None
    return KpmSample(*values)


def iter_kpm_rows(text: str) -> Iterator[KpmSample]:
    stream = io.StringIO(text)
    header = stream.readline()
    check_header(header)
    for row, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        yield _parse_line(line, row)


def read_kpm_csv(path: str | Path) -> list[KpmSample]:
    return list(iter_kpm_rows(Path(path).read_bytes().decode("utf-8")))

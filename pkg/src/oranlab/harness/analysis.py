"""Medians and empirical CDFs of KPM columns.

Sums use :func:`math.fsum`, and every statistic reads values in sorted
order. Results therefore do not depend on row order or platform.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..ransim import SLICES, KpmSample, SliceId, read_kpm_csv

SUMMARY_KPIS = ("dl_brate", "dl_tx_pkts", "dl_buffer", "prb_ratio")


class EmptySelection(ValueError):
    code = "empty_selection"


def median(values: Iterable[float]) -> float:
    xs = sorted(float(v) for v in values)
    n = len(xs)
    if n == 0:
        raise EmptySelection("median of no values")
    mid = n // 2
    if n % 2:
        return xs[mid]
    return (xs[mid - 1] + xs[mid]) / 2.0


def mean(values: Iterable[float]) -> float:
    xs = sorted(float(v) for v in values)
    if not xs:
        raise EmptySelection("mean of no values")
    return math.fsum(xs) / len(xs)


def ecdf(values: Iterable[float]) -> tuple[list[float], list[float]]:
    """Empirical CDF on its support: P(X <= x) for every distinct sample x."""
    xs = sorted(float(v) for v in values)
    n = len(xs)
    if n == 0:
        raise EmptySelection("CDF of no values")
    support: list[float] = []
    probs: list[float] = []
    for i, x in enumerate(xs):
        if i + 1 < n and xs[i + 1] == x:
            continue
        support.append(x)
        probs.append((i + 1) / n)
    return support, probs


def select(samples: Sequence[KpmSample], kpi: str, slice_id: SliceId | str) -> list[float]:
    if kpi not in SUMMARY_KPIS:
        raise ValueError(f"unknown KPI {kpi!r}; expected one of {SUMMARY_KPIS}")
    sid = SliceId.parse(slice_id)
    return [s.kpi(kpi) for s in samples if s.slice is sid]


def analyze(source: Sequence[KpmSample] | str | Path, kpi: str, slice_id: SliceId | str) -> dict[str, Any]:
    """Median, mean and CDF of one KPI of one slice, from samples or a KPM CSV."""
    samples = read_kpm_csv(source) if isinstance(source, (str, Path)) else source
    values = select(samples, kpi, slice_id)
    if not values:
        raise EmptySelection(f"no {SliceId.parse(slice_id).label} rows")
    xs, ps = ecdf(values)
    return {"n": len(values), "median": median(values), "mean": mean(values), "cdf": {"x": xs, "p": ps}}


def summarize(samples: Sequence[KpmSample]) -> dict[str, dict[str, dict[str, Any]]]:
    """slice -> KPI -> analysis, for every slice present in ``samples``."""
    out: dict[str, dict[str, dict[str, Any]]] = {}
    for s in SLICES:
        if not any(x.slice is s for x in samples):
            continue
        out[s.label] = {k: analyze(samples, k, s) for k in SUMMARY_KPIS}
    return out

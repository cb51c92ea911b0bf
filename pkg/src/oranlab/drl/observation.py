"""Turning the last K KPM windows into an agent observation."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..ransim.types import KpmSample, SliceId
from .autoencoder import WINDOW_K, WINDOW_KPIS, EncoderModel


def window_matrix(windows: Sequence[Mapping[SliceId, KpmSample]], slice_id: SliceId) -> np.ndarray:
    """K x M raw matrix of one slice, oldest window first.

    Short histories are left-padded with the oldest window.
    """
    if not windows:
        raise ValueError("no windows")
    rows = [[w[slice_id].kpi(k) for k in WINDOW_KPIS] for w in windows[-WINDOW_K:]]
    while len(rows) < WINDOW_K:
        rows.insert(0, rows[0])
    return np.asarray(rows, dtype=np.float64)


def kpi_mask(observed: Sequence[str]) -> np.ndarray:
    # prb_ratio is not one of the window columns, so it never unmasks anything.
    return np.array([1.0 if k in observed else 0.0 for k in WINDOW_KPIS])


class ObservationBuilder:
    """Concatenates one encoder latent per observed slice."""

    def __init__(
        self,
        encoder: EncoderModel,
        slices: Sequence[SliceId],
        observed_kpis: Mapping[SliceId, Sequence[str]] | None = None,
    ):
        self.encoder = encoder
        self.slices = tuple(slices)
        observed_kpis = observed_kpis or {}
        self.masks = {
            s: kpi_mask(observed_kpis[s]) if s in observed_kpis else np.ones(len(WINDOW_KPIS))
            for s in self.slices
        }

    @property
    def dim(self) -> int:
        return len(self.slices) * len(WINDOW_KPIS)

    def build(self, windows: Sequence[Mapping[SliceId, KpmSample]]) -> np.ndarray:
        parts = [self.encoder.encode(window_matrix(windows, s), self.masks[s]) for s in self.slices]
        return np.concatenate(parts)

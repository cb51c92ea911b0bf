"""Distance-indexed channel model.

Stands in for emulated RF: the achievable bits per PRB per TTI come from a
spectral-efficiency tier looked up by UE distance, optionally scaled by
seeded log-normal fading.
"""

from __future__ import annotations

import math

import numpy as np

from .types import UeState

# (upper distance bound in m, spectral efficiency in bit/RE); 4-bit CQI table values.
EFFICIENCY_TIERS: tuple[tuple[float, float], ...] = (
    (5.0, 5.5547),
    (10.0, 5.1152),
    (15.0, 4.5234),
    (20.0, 3.9023),
    (25.0, 3.3223),
    (30.0, 2.7305),
    (35.0, 2.4063),
    (40.0, 1.9141),
    (45.0, 1.4766),
    (50.0, 1.1758),
    (math.inf, 0.8770),
)

# 12 subcarriers x 14 symbols minus control/reference overhead.
DATA_RE_PER_PRB = 150

_FADING_BLOCK = 1024


def efficiency_at(distance_m: float) -> float:
    for bound, eff in EFFICIENCY_TIERS:
        if distance_m <= bound:
            return eff
    return EFFICIENCY_TIERS[-1][1]


def base_rate_bits(distance_m: float) -> int:
    """Bits one PRB carries in one TTI at ``distance_m`` without fading."""
    return max(1, int(efficiency_at(distance_m) * DATA_RE_PER_PRB))


class ChannelModel:
    """Per-PRB rate as a pure function of (seed, ue_id, tti, distance).

    Fading gains are drawn in blocks keyed by ``(seed, ue_id, block)`` so the
    sequence a UE sees does not depend on how many other UEs exist or in which
    order they are queried.
    """

    def __init__(self, seed: int = 0, fading_sigma_db: float = 0.0) -> None:
        if fading_sigma_db < 0:
            raise ValueError("fading_sigma_db must be non-negative")
        self.seed = int(seed)
        self.fading_sigma_db = float(fading_sigma_db)
        self._blocks: dict[tuple[int, int], np.ndarray] = {}

    def _gain(self, ue_id: int, tti: int) -> float:
        block, offset = divmod(tti, _FADING_BLOCK)
        key = (ue_id, block)
        gains = self._blocks.get(key)
        if gains is None:
            ss = np.random.SeedSequence([self.seed, 0xFAD, ue_id, block])
            draws = np.random.default_rng(ss).standard_normal(_FADING_BLOCK)
            gains = 10.0 ** (draws * self.fading_sigma_db / 10.0)
            # keep the cache bounded to the current and previous block per UE
            self._blocks.pop((ue_id, block - 2), None)
            self._blocks[key] = gains
        return float(gains[offset])

    def per_prb_rate(self, ue: UeState, tti: int) -> int:
        """Bits per PRB for ``ue`` in ``tti``; always at least 1."""
        base = base_rate_bits(ue.distance)
        if self.fading_sigma_db == 0.0:
            return base
        return max(1, int(base * self._gain(ue.ue_id, tti)))

"""Traffic sources for the three slices."""

from __future__ import annotations

import numpy as np

from .types import PACKET_SIZE_BYTES, SliceId, TrafficProfile, UeState


def generate_arrivals(
    profile: TrafficProfile, ue: UeState, dt: int, rng: np.random.Generator
) -> int:
    """Bytes arriving at ``ue`` over ``dt`` milliseconds.

    eMBB is constant bitrate: the exact byte count is carried across calls in
    integer bit-milliseconds, so no fraction of a byte is ever lost. mMTC and
    URLLC draw a Poisson number of fixed-size packets.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = profile.rate(ue.slice)
    if rate <= 0:
        return 0
    if ue.slice is SliceId.EMBB:
        # carry is in bit*ms/s units: 8000 of them make one byte.
        acc = int(ue.arrival_carry) + int(round(rate)) * dt
        n_bytes, rest = divmod(acc, 8000)
        ue.arrival_carry = rest
        return int(n_bytes)
    mean_pkts = rate * dt / 1000.0 / (8 * PACKET_SIZE_BYTES)
    return int(rng.poisson(mean_pkts)) * PACKET_SIZE_BYTES

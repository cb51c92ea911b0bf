"""E2-like wire protocol between the simulated gNB and the RIC."""

from .codec import (
    MAX_FRAME_BYTES,
    E2Error,
    FrameTooLarge,
    NeedMoreData,
    ProtocolError,
    decode_frame,
    decode_message,
    encode_message,
)
from .messages import Control, ControlAck, ControlDirective, E2Message, Error, KpmReport, Subscribe
from .transport import E2Connection, FrameDecoder, LoopbackEndpoint, SeqGuard, loopback_pair

__all__ = [
    "MAX_FRAME_BYTES", "E2Error", "FrameTooLarge", "NeedMoreData", "ProtocolError",
    "decode_frame", "decode_message", "encode_message", "Control", "ControlAck",
    "ControlDirective", "E2Message", "Error", "KpmReport", "Subscribe", "E2Connection",
    "FrameDecoder", "LoopbackEndpoint", "SeqGuard", "loopback_pair",
]

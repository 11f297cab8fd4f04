"""Binary framing for protocol messages.

Layout (all integers big-endian)::

    offset  size  field
    0       4     magic "BPD1"
    4       1     type: 0x01 batch, 0x02 request, 0x03 response, 0x7F error
    5       16    session id
    21      2     bit length of p
    23      2     payload count
    25      ...   count residues, W bytes each

``W`` is ``ceil(2 * bitlen(p) / 8)`` for batch frames (values mod p^2),
``ceil(bitlen(p) / 8)`` for request/response frames (values mod p) and 1
for error frames, whose single payload byte is the reason code.
"""

from __future__ import annotations

import enum
import struct
from typing import BinaryIO

from .errors import EncodingError, MalformedFrameError
from .numcore import PrimeModulus
from .protocol import (
    SESSION_ID_BYTES,
    BlindRequest,
    BlindResponse,
    CiphertextBatch,
    ErrorReason,
    ErrorReply,
    ProtocolMessage,
)

MAGIC = b"BPD1"
HEADER = struct.Struct(">4sB16sHH")
HEADER_LEN = HEADER.size  # 25


class MsgType(enum.IntEnum):
    CIPHERTEXT_BATCH = 0x01
    BLIND_REQUEST = 0x02
    BLIND_RESPONSE = 0x03
    ERROR = 0x7F


def residue_width(msg_type: MsgType, p_bitlen: int) -> int:
    if msg_type is MsgType.CIPHERTEXT_BATCH:
        return (2 * p_bitlen + 7) // 8
    if msg_type is MsgType.ERROR:
        return 1
    return (p_bitlen + 7) // 8


def _modulus(p: PrimeModulus | int) -> PrimeModulus:
    return p if isinstance(p, PrimeModulus) else PrimeModulus(p)


def _split(msg: ProtocolMessage, p: PrimeModulus) -> tuple[MsgType, tuple[int, ...], int]:
    """Message type, payload values and their exclusive upper bound."""
    if isinstance(msg, CiphertextBatch):
        return MsgType.CIPHERTEXT_BATCH, tuple(msg.values), p.p_squared
    if isinstance(msg, BlindRequest):
        return MsgType.BLIND_REQUEST, (msg.w,), p.p
    if isinstance(msg, BlindResponse):
        return MsgType.BLIND_RESPONSE, (msg.w_prime,), p.p
    if isinstance(msg, ErrorReply):
        return MsgType.ERROR, (int(ErrorReason(msg.reason)),), 256
    raise EncodingError(f"not a protocol message: {msg!r}")


def encode_frame(msg: ProtocolMessage, p: PrimeModulus | int) -> bytes:
    p = _modulus(p)
    if len(msg.session_id) != SESSION_ID_BYTES:
        raise EncodingError(f"session id must be {SESSION_ID_BYTES} bytes")
    msg_type, values, bound = _split(msg, p)
    if len(values) > 0xFFFF:
        raise EncodingError("too many payload values for one frame")
    for v in values:
        if not 0 <= v < bound:
            raise EncodingError(f"value {v} out of range [0, {bound})")
    width = residue_width(msg_type, p.bit_length)
    header = HEADER.pack(MAGIC, msg_type, msg.session_id, p.bit_length, len(values))
    return header + b"".join(v.to_bytes(width, "big") for v in values)


def frame_length(header: bytes) -> int:
    """Total frame length announced by a 25-byte header."""
    if len(header) < HEADER_LEN:
        raise MalformedFrameError("truncated header")
    magic, raw_type, _, p_bitlen, count = HEADER.unpack_from(header)
    if magic != MAGIC:
        raise MalformedFrameError(f"bad magic {magic!r}")
    try:
        msg_type = MsgType(raw_type)
    except ValueError:
        raise MalformedFrameError(f"unknown message type 0x{raw_type:02x}") from None
    return HEADER_LEN + count * residue_width(msg_type, p_bitlen)


def decode_frame(data: bytes, p: PrimeModulus | int) -> ProtocolMessage:
    """Strictly parse one frame; ``p`` is the session's public prime."""
    p = _modulus(p)
    total = frame_length(data)
    if len(data) != total:
        raise MalformedFrameError(f"frame is {len(data)} bytes, header announces {total}")
    _, raw_type, session_id, p_bitlen, count = HEADER.unpack_from(data)
    msg_type = MsgType(raw_type)
    if p_bitlen != p.bit_length:
        raise MalformedFrameError(f"frame is for a {p_bitlen}-bit prime, session uses {p.bit_length}")
    width = residue_width(msg_type, p_bitlen)
    values = [
        int.from_bytes(data[off:off + width], "big")
        for off in range(HEADER_LEN, total, width)
    ]
    if msg_type is MsgType.CIPHERTEXT_BATCH:
        if any(v >= p.p_squared for v in values):
            raise MalformedFrameError("batch value out of range mod p^2")
        return CiphertextBatch(session_id, tuple(values))
    if count != 1:
        raise MalformedFrameError(f"{msg_type.name} frame must carry one value, got {count}")
    (value,) = values
    if msg_type is MsgType.ERROR:
        try:
            return ErrorReply(session_id, ErrorReason(value))
        except ValueError:
            raise MalformedFrameError(f"unknown error reason 0x{value:02x}") from None
    if value >= p.p:
        raise MalformedFrameError(f"residue {value} out of range mod p")
    if msg_type is MsgType.BLIND_REQUEST:
        return BlindRequest(session_id, value)
    return BlindResponse(session_id, value)


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise MalformedFrameError(f"stream ended after {len(buf)} of {n} bytes")
        buf += chunk
    return bytes(buf)


def read_frame(stream: BinaryIO) -> bytes:
    """Read exactly one frame's bytes from a stream without decoding it."""
    header = _read_exact(stream, HEADER_LEN)
    rest = frame_length(header) - HEADER_LEN
    return header + _read_exact(stream, rest)

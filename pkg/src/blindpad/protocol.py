"""Three-party blind decryption with single-use key material.

Roles and the keys each one holds:

=========  ==================================================
Encryptor  inner key ``(x_k, y_k)``, batch pad keys ``k_1..k_L``
Alice      batch pad keys ``k_1..k_L``, blinding keys ``k_C, k_P``
Decryptor  inner key ``(x_k, y_k)``, blinding keys ``k_C, k_P``
=========  ==================================================

A trusted dealer mints one bundle per session and hands each role a view
containing only its own keys. The message flow is::

    Encryptor -> Alice      u_j = c_j + k_j  (mod p^2),  j = 1..L
    Alice     -> Decryptor  w   = (c_i mod p) + k_C  (mod p)
    Decryptor -> Alice      w'  = Dec(x_k, y_k, c') + k_P  (mod p)

after which Alice recovers ``m_i = Map(c', m', c_i)``. The Decryptor
answers exactly once per session; the consumed flag is flipped under a lock
together with an optional persistence hook, so the response never leaves
before the flag is durable.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from . import twopad
from .errors import (
    CapacityError,
    CorruptedResponseError,
    InvalidRequestError,
    MalformedBatchError,
    ProtocolError,
    SelectionError,
    SessionStateError,
    SingleUseViolation,
)
from .numcore import PrimeModulus, RandomSource
from .outerpad import OuterKey, otp_decrypt, otp_encrypt, otp_gen
from .twopad import TwoPadKey

SESSION_ID_BYTES = 16


class ErrorReason(enum.IntEnum):
    SINGLE_USE_VIOLATION = 0x01
    INVALID_REQUEST = 0x02
    MALFORMED_FRAME = 0x03


@dataclass(frozen=True)
class CiphertextBatch:
    session_id: bytes
    values: tuple[int, ...]


@dataclass(frozen=True)
class BlindRequest:
    session_id: bytes
    w: int


@dataclass(frozen=True)
class BlindResponse:
    session_id: bytes
    w_prime: int


@dataclass(frozen=True)
class ErrorReply:
    session_id: bytes
    reason: ErrorReason


ProtocolMessage = Union[CiphertextBatch, BlindRequest, BlindResponse, ErrorReply]


class SessionState(enum.Enum):
    FRESH = "fresh"
    CONSUMED = "consumed"


class _Latch:
    """One-shot flag; callers hold ``lock`` across check-and-set."""

    def __init__(self, tripped: bool = False) -> None:
        self.lock = threading.Lock()
        self.tripped = tripped


@dataclass(frozen=True)
class EncryptorView:
    session_id: bytes
    p: PrimeModulus
    L: int
    inner_key: TwoPadKey
    outer_batch_keys: tuple[OuterKey, ...]
    _published: _Latch = field(default_factory=_Latch, repr=False, compare=False)

    @property
    def published(self) -> bool:
        return self._published.tripped


@dataclass(frozen=True)
class AliceView:
    session_id: bytes
    p: PrimeModulus
    L: int
    outer_batch_keys: tuple[OuterKey, ...]
    k_C: OuterKey
    k_P: OuterKey


@dataclass(frozen=True)
class DecryptorView:
    session_id: bytes
    p: PrimeModulus
    L: int
    inner_key: TwoPadKey
    k_C: OuterKey
    k_P: OuterKey
    _consumed: _Latch = field(default_factory=_Latch, repr=False, compare=False)

    @property
    def consumed(self) -> bool:
        return self._consumed.tripped

    @classmethod
    def restore(cls, *, consumed: bool, **fields) -> "DecryptorView":
        """Rebuild a view from storage, carrying over the consumed flag."""
        return cls(**fields, _consumed=_Latch(consumed))


@dataclass(frozen=True)
class SessionKeyMaterial:
    """Everything the dealer minted for one session."""

    session_id: bytes
    p: PrimeModulus
    L: int
    inner_key: TwoPadKey
    outer_batch_keys: tuple[OuterKey, ...]
    k_C: OuterKey
    k_P: OuterKey
    _consumed: _Latch = field(default_factory=_Latch, repr=False, compare=False)

    @property
    def state(self) -> SessionState:
        return SessionState.CONSUMED if self._consumed.tripped else SessionState.FRESH

    def encryptor_view(self) -> EncryptorView:
        return EncryptorView(self.session_id, self.p, self.L, self.inner_key, self.outer_batch_keys)

    def alice_view(self) -> AliceView:
        return AliceView(self.session_id, self.p, self.L, self.outer_batch_keys, self.k_C, self.k_P)

    def decryptor_view(self) -> DecryptorView:
        # shares the latch so the bundle's state follows the Decryptor
        return DecryptorView(
            self.session_id, self.p, self.L, self.inner_key, self.k_C, self.k_P, self._consumed
        )


def dealer_issue(
    p: PrimeModulus, L: int, rng: RandomSource
) -> tuple[SessionKeyMaterial, tuple[EncryptorView, AliceView, DecryptorView]]:
    if not 1 <= L <= p.capacity:
        raise CapacityError(f"L must be in [1, {p.capacity}], got {L}")
    session_id = rng.randbytes(SESSION_ID_BYTES)
    inner_key = twopad.gen(p, rng)
    batch_keys = tuple(otp_gen(p.p_squared, rng) for _ in range(L))
    k_C = otp_gen(p.p, rng)
    k_P = otp_gen(p.p, rng)
    material = SessionKeyMaterial(session_id, p, L, inner_key, batch_keys, k_C, k_P)
    views = (material.encryptor_view(), material.alice_view(), material.decryptor_view())
    return material, views


def _same_session(expected: bytes, got: bytes) -> None:
    if expected != got:
        raise ProtocolError(f"message for session {got.hex()} sent to session {expected.hex()}")


def encryptor_publish(view: EncryptorView, msgs: Sequence[int], rng: RandomSource) -> CiphertextBatch:
    if len(msgs) != view.L:
        raise ProtocolError(f"expected {view.L} messages, got {len(msgs)}")
    latch = view._published
    with latch.lock:
        if latch.tripped:
            raise SessionStateError("this session's batch was already published")
        cs = twopad.encrypt_batch(view.inner_key, view.p, msgs, rng)
        us = tuple(otp_encrypt(k, c, view.p.p_squared) for k, c in zip(view.outer_batch_keys, cs))
        latch.tripped = True
    return CiphertextBatch(view.session_id, us)


class Phase(enum.Enum):
    RECEIVED = "received"
    REQUESTED = "requested"
    FINISHED = "finished"


@dataclass
class AliceSessionState:
    ciphertexts: tuple[int, ...]
    index: int | None = None
    phase: Phase = Phase.RECEIVED


def alice_receive(view: AliceView, batch: CiphertextBatch) -> AliceSessionState:
    _same_session(view.session_id, batch.session_id)
    if len(batch.values) != view.L:
        raise ProtocolError(f"expected {view.L} ciphertexts, got {len(batch.values)}")
    n = view.p.p_squared
    cs = tuple(otp_decrypt(k, u, n) for k, u in zip(view.outer_batch_keys, batch.values))
    residues = [c % view.p.p for c in cs]
    if 0 in residues:
        raise MalformedBatchError("batch holds a ciphertext with residue 0")
    if len(set(residues)) != len(residues):
        raise MalformedBatchError("batch holds two ciphertexts with the same residue mod p")
    return AliceSessionState(cs)


def alice_request(state: AliceSessionState, i: int, view: AliceView) -> BlindRequest:
    """Blind the residue of the ``i``-th ciphertext (1-based)."""
    if state.phase is not Phase.RECEIVED:
        raise SessionStateError(f"cannot request in phase {state.phase.value}")
    if not 1 <= i <= len(state.ciphertexts):
        raise SelectionError(f"index {i} outside 1..{len(state.ciphertexts)}")
    c_prime = state.ciphertexts[i - 1] % view.p.p
    w = otp_encrypt(view.k_C, c_prime, view.p.p)
    state.index = i
    state.phase = Phase.REQUESTED
    return BlindRequest(view.session_id, w)


def decryptor_respond(
    view: DecryptorView,
    req: BlindRequest,
    on_consume: Callable[[], None] | None = None,
) -> BlindResponse:
    """Answer the single blind request this session allows.

    ``on_consume`` runs after the answer is computed and before the session
    is marked consumed; the server uses it to persist the flag. If it
    raises, the session stays fresh and no response is produced.
    """
    _same_session(view.session_id, req.session_id)
    p = view.p
    if not 0 <= req.w < p.p:
        raise InvalidRequestError(f"w={req.w} is not a residue mod {p.p}")
    latch = view._consumed
    with latch.lock:
        if latch.tripped:
            raise SingleUseViolation(f"session {view.session_id.hex()} already answered")
        c_prime = otp_decrypt(view.k_C, req.w, p.p)
        if c_prime == 0:
            raise InvalidRequestError("blinded residue decodes to 0")
        m_prime = twopad.decrypt(view.inner_key, p, c_prime)
        assert 0 <= m_prime < p.p
        w_prime = otp_encrypt(view.k_P, m_prime, p.p)
        if on_consume is not None:
            on_consume()
        latch.tripped = True
    return BlindResponse(view.session_id, w_prime)


def alice_finish(state: AliceSessionState, resp: BlindResponse, view: AliceView) -> int:
    if state.phase is not Phase.REQUESTED or state.index is None:
        raise SessionStateError(f"cannot finish in phase {state.phase.value}")
    _same_session(view.session_id, resp.session_id)
    p = view.p
    if not 0 <= resp.w_prime < p.p:
        raise CorruptedResponseError(f"w'={resp.w_prime} is not a residue mod {p.p}")
    m_prime = otp_decrypt(view.k_P, resp.w_prime, p.p)
    c_i = state.ciphertexts[state.index - 1]
    m_i = twopad.map_ciphertext(c_i % p.p, m_prime, c_i, p)
    if m_i is None:
        raise CorruptedResponseError("response does not match the requested residue")
    state.phase = Phase.FINISHED
    return m_i

"""Keystore files: one role's key material as labelled decimal text.

Example decryptor record::

    # blindpad keystore
    format = 1
    role = decryptor
    session_id = 9f0c...
    p = 5
    L = 4
    x_k = 2
    y_k = 3
    k_C = 1
    k_P = 4
    key_bits = 12
    consumed = false

Writes go through a temporary file, ``fsync`` and an atomic rename, so a
``consumed = true`` flag is on disk before :func:`keystore_save` returns.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import BlindPadError, KeystoreError
from .numcore import PrimeModulus
from .outerpad import OuterKey
from .protocol import (
    SESSION_ID_BYTES,
    AliceView,
    DecryptorView,
    EncryptorView,
    SessionKeyMaterial,
    _Latch,
)
from .twopad import TwoPadKey

FORMAT_VERSION = 1
ROLES = ("dealer", "encryptor", "alice", "decryptor")


def _batch_labels(L: int) -> list[str]:
    return [f"k_{j}" for j in range(1, L + 1)]


def role_fields(role: str, L: int) -> list[str]:
    inner = ["x_k", "y_k"]
    blind = ["k_C", "k_P"]
    return {
        "dealer": inner + _batch_labels(L) + blind,
        "encryptor": inner + _batch_labels(L),
        "alice": _batch_labels(L) + blind,
        "decryptor": inner + blind,
    }[role]


@dataclass(frozen=True)
class KeystoreRecord:
    session_id: bytes
    role: str
    p: PrimeModulus
    L: int
    keys: dict[str, int]
    consumed: bool = False

    def validate(self) -> "KeystoreRecord":
        if self.role not in ROLES:
            raise KeystoreError(f"unknown role {self.role!r}")
        if len(self.session_id) != SESSION_ID_BYTES:
            raise KeystoreError("session id must be 16 bytes")
        if not 1 <= self.L <= self.p.capacity:
            raise KeystoreError(f"L={self.L} outside [1, {self.p.capacity}]")
        expected = role_fields(self.role, self.L)
        if sorted(self.keys) != sorted(expected):
            raise KeystoreError(f"{self.role} record needs exactly the keys {expected}")
        for label, value in self.keys.items():
            bound = self.p.p_squared if label.startswith("k_") and label[2:].isdigit() else self.p.p
            if not 0 <= value < bound:
                raise KeystoreError(f"{label}={value} out of range [0, {bound})")
        return self

    @property
    def key_bits(self) -> int:
        """Stored key material in bits, counting each residue at its modulus' width."""
        bits = 0
        for label in self.keys:
            mod = self.p.p_squared if label.startswith("k_") and label[2:].isdigit() else self.p.p
            bits += (mod - 1).bit_length()
        return bits

    def _inner(self) -> TwoPadKey:
        return TwoPadKey(self.keys["x_k"], self.keys["y_k"])

    def _batch(self) -> tuple[OuterKey, ...]:
        return tuple(OuterKey(self.keys[label], self.p.p_squared) for label in _batch_labels(self.L))

    def _blind(self, label: str) -> OuterKey:
        return OuterKey(self.keys[label], self.p.p)

    def to_view(self):
        """Role view (or the full bundle for the dealer) carrying the stored flag."""
        common = dict(session_id=self.session_id, p=self.p, L=self.L)
        if self.role == "encryptor":
            return EncryptorView(**common, inner_key=self._inner(), outer_batch_keys=self._batch(),
                                 _published=_Latch(self.consumed))
        if self.role == "alice":
            return AliceView(**common, outer_batch_keys=self._batch(),
                             k_C=self._blind("k_C"), k_P=self._blind("k_P"))
        if self.role == "decryptor":
            return DecryptorView.restore(consumed=self.consumed, **common, inner_key=self._inner(),
                                         k_C=self._blind("k_C"), k_P=self._blind("k_P"))
        return SessionKeyMaterial(**common, inner_key=self._inner(), outer_batch_keys=self._batch(),
                                  k_C=self._blind("k_C"), k_P=self._blind("k_P"),
                                  _consumed=_Latch(self.consumed))

    def with_consumed(self) -> "KeystoreRecord":
        return replace(self, consumed=True)


def records_from_material(material: SessionKeyMaterial) -> dict[str, KeystoreRecord]:
    """Split a dealer bundle into one record per role."""
    everything = {
        "x_k": material.inner_key.x_k,
        "y_k": material.inner_key.y_k,
        "k_C": material.k_C.k,
        "k_P": material.k_P.k,
    }
    for label, key in zip(_batch_labels(material.L), material.outer_batch_keys):
        everything[label] = key.k
    return {
        role: KeystoreRecord(
            material.session_id, role, material.p, material.L,
            {label: everything[label] for label in role_fields(role, material.L)},
        )
        for role in ROLES
    }


def dumps(record: KeystoreRecord) -> str:
    record.validate()
    lines = [
        "# blindpad keystore",
        f"format = {FORMAT_VERSION}",
        f"role = {record.role}",
        f"session_id = {record.session_id.hex()}",
        f"p = {record.p.p}",
        f"L = {record.L}",
    ]
    lines += [f"{label} = {record.keys[label]}" for label in role_fields(record.role, record.L)]
    if record.role == "decryptor":
        lines.append(f"key_bits = {record.key_bits}")
    lines.append(f"consumed = {'true' if record.consumed else 'false'}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> KeystoreRecord:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        label, sep, value = line.partition("=")
        label, value = label.strip(), value.strip()
        if not sep or not label or label in entries:
            raise KeystoreError(f"line {lineno}: expected a unique 'label = value' pair")
        entries[label] = value
    try:
        if entries.pop("format") != str(FORMAT_VERSION):
            raise KeystoreError("unsupported keystore format")
        role = entries.pop("role")
        session_id = bytes.fromhex(entries.pop("session_id"))
        p = PrimeModulus(_decimal(entries.pop("p")))
        L = _decimal(entries.pop("L"))
        consumed = {"true": True, "false": False}[entries.pop("consumed")]
        key_bits = entries.pop("key_bits", None)
        record = KeystoreRecord(
            session_id, role, p, L,
            {label: _decimal(value) for label, value in entries.items()},
            consumed,
        ).validate()
    except KeystoreError:
        raise
    except (KeyError, ValueError, BlindPadError) as exc:
        raise KeystoreError(f"invalid keystore: {exc}") from exc
    if (key_bits is not None) != (role == "decryptor"):
        raise KeystoreError("key_bits belongs to decryptor records only")
    if key_bits is not None and _decimal(key_bits) != record.key_bits:
        raise KeystoreError(f"key_bits {key_bits} does not match stored keys ({record.key_bits})")
    return record


def _decimal(text: str) -> int:
    if not text.isdigit():
        raise KeystoreError(f"expected a decimal integer, got {text!r}")
    return int(text, 10)


def keystore_save(record: KeystoreRecord, path: str | os.PathLike) -> None:
    path = Path(path)
    data = dumps(record).encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, 0o600)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    dir_fd = os.open(path.parent, os.O_RDONLY)
    try:
        os.fsync(dir_fd)
    finally:
        os.close(dir_fd)


def keystore_load(path: str | os.PathLike) -> KeystoreRecord:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise KeystoreError(f"cannot read keystore {path}: {exc}") from exc
    return loads(text)

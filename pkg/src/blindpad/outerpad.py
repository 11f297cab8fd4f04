"""Additive one-time pad over Z_n.

This is the outer layer protecting the ciphertext batch (``n = p^2``) and
the blinded request/response (``n = p``). With a uniform key, the map
``k -> (m + k) mod n`` is a bijection for every ``m``, which is Shannon's
perfect secrecy condition with key length equal to message length.

Keys remember their modulus so a ``p^2`` batch key can never be spent on a
mod-``p`` value or the other way round. Single use is tracked by the
protocol layer, not here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import InvalidModulusError, ModulusMismatchError
from .numcore import RandomSource, sample_uniform

__all__ = ["OuterKey", "otp_decrypt", "otp_encrypt", "otp_gen"]


@dataclass(frozen=True)
class OuterKey:
    k: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidModulusError(f"pad modulus must be >= 2, got {self.n}")
        if not 0 <= self.k < self.n:
            raise ValueError(f"pad key {self.k} outside Z_{self.n}")


def otp_gen(n: int, rng: RandomSource) -> OuterKey:
    if n < 2:
        raise InvalidModulusError(f"pad modulus must be >= 2, got {n}")
    return OuterKey(sample_uniform(n, False, rng), n)


def all_keys(n: int) -> Iterator[OuterKey]:
    for k in range(n):
        yield OuterKey(k, n)


def _bind(key: OuterKey, value: int, n: int | None) -> None:
    if n is not None and n != key.n:
        raise ModulusMismatchError(f"key bound to Z_{key.n} applied to a value in Z_{n}")
    if not 0 <= value < key.n:
        raise ModulusMismatchError(f"value {value} is not a residue mod {key.n}")


def otp_encrypt(key: OuterKey, m: int, n: int | None = None) -> int:
    """Return ``(m + k) mod n``; ``n``, when given, must match the key's modulus."""
    _bind(key, m, n)
    return (m + key.k) % key.n


def otp_decrypt(key: OuterKey, c: int, n: int | None = None) -> int:
    _bind(key, c, n)
    return (c - key.k) % key.n

"""The inner cipher: a two-element key pad over Z_{p^2}.

A key is a pair ``(x_k, y_k)`` of elements of Z_p. A message ``m`` in Z_p
is encrypted with a fresh nonce ``z`` drawn from Z_p minus zero::

    b = (p*m + z) mod p^2
    c = (p*x_k*b^2 + p*y_k*b + b) mod p^2  =  p*(x_k*z^2 + y_k*z + m) + z

so the ciphertext's residue modulo ``p`` is the nonce itself and its high
digit is the message shifted by a key-dependent pad. Two consequences
drive the whole protocol:

* Knowing one plaintext ``m1`` for ``c1`` reveals the plaintext of any
  ``c2`` with the same residue (:func:`map_ciphertext`).
* Two plaintext/ciphertext pairs with different residues pin down the key
  (:func:`recover_key`). A key must therefore serve at most one decryption.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import (
    CapacityError,
    DegenerateSystemError,
    EmptyBatchError,
    InvalidCiphertextError,
)
from .numcore import PrimeModulus, RandomSource, inv_mod, sample_distinct, sample_uniform

__all__ = [
    "TwoPadKey",
    "decrypt",
    "encrypt",
    "encrypt_batch",
    "gen",
    "map_ciphertext",
    "recover_key",
]


@dataclass(frozen=True)
class TwoPadKey:
    x_k: int
    y_k: int

    def check(self, p: PrimeModulus) -> "TwoPadKey":
        if not (0 <= self.x_k < p.p and 0 <= self.y_k < p.p):
            raise ValueError(f"key component out of range for p={p.p}")
        return self


def _check_plaintext(m: int, p: PrimeModulus) -> None:
    if not 0 <= m < p.p:
        raise ValueError(f"plaintext {m} outside Z_{p.p}")


def _check_ciphertext(c: int, p: PrimeModulus) -> None:
    if not 0 <= c < p.p_squared:
        raise InvalidCiphertextError(f"ciphertext {c} outside Z_{p.p_squared}")


def gen(p: PrimeModulus, rng: RandomSource) -> TwoPadKey:
    x_k = sample_uniform(p.p, False, rng)
    y_k = sample_uniform(p.p, False, rng)
    return TwoPadKey(x_k, y_k)


def all_keys(p: PrimeModulus) -> Iterator[TwoPadKey]:
    """Every key in Z_p x Z_p exactly once (for exhaustive checks)."""
    for x_k in range(p.p):
        for y_k in range(p.p):
            yield TwoPadKey(x_k, y_k)


def encrypt_with_nonce(key: TwoPadKey, p: PrimeModulus, m: int, z: int) -> int:
    """Encrypt with a caller-chosen nonce.

    Test and verification use only: reusing ``z`` across messages under one
    key is exactly what :func:`map_ciphertext` exploits. Operational code
    must go through :func:`encrypt` or :func:`encrypt_batch`.
    """
    _check_plaintext(m, p)
    if not 0 < z < p.p:
        raise ValueError(f"nonce {z} outside Z_{p.p} minus zero")
    n = p.p_squared
    b = (p.p * m + z) % n
    return (p.p * key.x_k * b * b + p.p * key.y_k * b + b) % n


def encrypt(key: TwoPadKey, p: PrimeModulus, m: int, rng: RandomSource) -> int:
    z = sample_uniform(p.p, True, rng)
    return encrypt_with_nonce(key, p, m, z)


def decrypt(key: TwoPadKey, p: PrimeModulus, c: int) -> int:
    """Invert :func:`encrypt`.

    Ciphertexts with residue zero are accepted here; the protocol layer is
    where they get rejected.
    """
    _check_ciphertext(c, p)
    n = p.p_squared
    z = c % p.p
    t = (p.p * -key.x_k * z * z + p.p * -key.y_k * z + c) % n
    q, rem = divmod(t - z, p.p)
    assert rem == 0, "t - z is always a multiple of p"
    assert 0 <= q < p.p
    return q


def map_ciphertext(c1: int, m1: int, c2: int, p: PrimeModulus) -> int | None:
    """Turn the known decryption ``m1`` of ``c1`` into the decryption of ``c2``.

    Returns None when ``c1`` and ``c2`` differ modulo ``p``; no information
    about ``c2`` follows from ``(m1, c1)`` in that case.
    """
    _check_ciphertext(c1, p)
    _check_ciphertext(c2, p)
    _check_plaintext(m1, p)
    if (c1 - c2) % p.p:
        return None
    diff = (c2 - c1 + p.p * m1) % p.p_squared
    q, rem = divmod(diff, p.p)
    assert rem == 0
    return q


def encrypt_batch(key: TwoPadKey, p: PrimeModulus, msgs: Sequence[int], rng: RandomSource) -> list[int]:
    """Encrypt up to ``p - 1`` messages whose ciphertexts are pairwise distinct mod ``p``.

    Nonces are drawn without replacement from Z_p minus zero; since each
    ciphertext is congruent to its nonce, distinct nonces are the same thing
    as distinct residues.
    """
    if not msgs:
        raise EmptyBatchError("batch must contain at least one message")
    if len(msgs) > p.capacity:
        raise CapacityError(f"{len(msgs)} messages exceed capacity p - 1 = {p.capacity}")
    for m in msgs:
        _check_plaintext(m, p)
    nonces = sample_distinct(p.p, len(msgs), rng, exclude_zero=True)
    return [encrypt_with_nonce(key, p, m, z) for m, z in zip(msgs, nonces)]


def recover_key(pair1: tuple[int, int], pair2: tuple[int, int], p: PrimeModulus) -> TwoPadKey:
    """Solve for the unique key consistent with two ``(plaintext, ciphertext)`` pairs.

    With ``z_i = c_i mod p`` and ``v_i = (c_i - p*m_i - z_i) / p`` the key
    satisfies ``v_i = x*z_i^2 + y*z_i (mod p)``. The determinant
    ``z1^2*z2 - z2^2*z1 = z1*z2*(z1 - z2)`` is a unit exactly when both
    nonces are nonzero and distinct.
    """
    (m1, c1), (m2, c2) = pair1, pair2
    for m, c in ((m1, c1), (m2, c2)):
        _check_plaintext(m, p)
        _check_ciphertext(c, p)
    q = p.p
    z1, z2 = c1 % q, c2 % q
    if z1 == 0 or z2 == 0:
        raise InvalidCiphertextError("ciphertext with residue 0 was not produced by encrypt")
    if z1 == z2:
        raise DegenerateSystemError("ciphertexts share a residue mod p")
    v1 = ((c1 - q * m1 - z1) // q) % q
    v2 = ((c2 - q * m2 - z2) // q) % q
    # Cramer's rule on [[z1^2, z1], [z2^2, z2]] @ (x, y) = (v1, v2)
    det_inv = inv_mod(z1 * z1 * z2 - z2 * z2 * z1, q)
    x_k = (v1 * z2 - v2 * z1) * det_inv % q
    y_k = (z1 * z1 * v2 - z2 * z2 * v1) * det_inv % q
    return TwoPadKey(x_k, y_k)

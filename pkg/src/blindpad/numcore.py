"""Modular arithmetic, primality testing and uniform sampling.

Residues are plain Python ints; every function that produces one returns
the least non-negative representative. Python integers are arbitrary
precision, so products of two values below ``(2**127 - 1)**2`` are exact
without any fixed-width emulation.

Randomness comes from :class:`RandomSource`. In operational mode it reads
the operating system's entropy pool. Deterministic mode expands a 64-bit
seed with SHA-256 in counter mode and exists only so tests are
reproducible: the secrecy guarantees of the scheme assume truly uniform
keys and nonces, which a seeded generator does not provide.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field

from .errors import EmptyRangeError, InvalidModulusError, NoInverseError

__all__ = [
    "MAX_PRIME_BITS",
    "PrimeModulus",
    "RandomSource",
    "ceil_log2",
    "inv_mod",
    "is_prime",
    "reduce_mod",
    "sample_distinct",
    "sample_uniform",
]

# p**2 must fit in 254 bits (the largest preset is 2**127 - 1)
MAX_PRIME_BITS = 127

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# Deterministic for n < 3.3 * 10**24, which covers all n < 2**64.
_DETERMINISTIC_WITNESSES = _SMALL_PRIMES
_PROBABILISTIC_ROUNDS = 64


def reduce_mod(x: int, n: int) -> int:
    """Return the least non-negative representative of ``x`` modulo ``n``."""
    if n < 1:
        raise InvalidModulusError(f"modulus must be positive, got {n}")
    return x % n


def inv_mod(a: int, p: int) -> int:
    """Multiplicative inverse of ``a`` modulo ``p``.

    Raises:
        NoInverseError: if ``a`` is congruent to zero (or shares a factor
            with ``p`` when ``p`` is composite).
    """
    if p < 2:
        raise InvalidModulusError(f"modulus must be >= 2, got {p}")
    try:
        return pow(a % p, -1, p)
    except ValueError:
        raise NoInverseError(f"{a} has no inverse modulo {p}") from None


def ceil_log2(n: int) -> int:
    """Smallest ``k`` with ``2**k >= n``, for ``n >= 1``."""
    if n < 1:
        raise ValueError("ceil_log2 needs n >= 1")
    return (n - 1).bit_length()


def _miller_rabin_round(n: int, d: int, r: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Miller-Rabin primality test.

    Exact for ``n < 2**64``. Larger inputs run 64 rounds with random
    witnesses, so a composite slips through with probability below 2**-128.
    """
    if n < 2:
        raise ValueError(f"primality is defined for n >= 2, got {n}")
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if n < 2**64:
        witnesses = _DETERMINISTIC_WITNESSES
    else:
        draw = secrets.SystemRandom()
        witnesses = tuple(draw.randrange(2, n - 1) for _ in range(_PROBABILISTIC_ROUNDS))
    return all(_miller_rabin_round(n, d, r, a) for a in witnesses)


@dataclass(frozen=True)
class PrimeModulus:
    """The public prime ``p`` with ``p**2`` cached."""

    p: int
    p_squared: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        p = self.p
        if not isinstance(p, int) or isinstance(p, bool):
            raise InvalidModulusError(f"p must be an int, got {type(p).__name__}")
        if p < 5:
            raise InvalidModulusError(f"p must be at least 5, got {p}")
        if p.bit_length() > MAX_PRIME_BITS:
            raise InvalidModulusError(f"p exceeds {MAX_PRIME_BITS} bits")
        if not is_prime(p):
            raise InvalidModulusError(f"{p} is not prime")
        object.__setattr__(self, "p_squared", p * p)

    def __int__(self) -> int:
        return self.p

    @property
    def bit_length(self) -> int:
        return self.p.bit_length()

    @property
    def capacity(self) -> int:
        """Maximum batch size: one ciphertext per nonzero residue."""
        return self.p - 1

    @property
    def plaintext_bits(self) -> int:
        return ceil_log2(self.p)

    @property
    def ciphertext_bits(self) -> int:
        return ceil_log2(self.p_squared)

    @property
    def decryptor_key_bits(self) -> int:
        # x_k, y_k, k_C, k_P: four elements of Z_p
        return 4 * ceil_log2(self.p)

    @property
    def security_parameter(self) -> int:
        """Largest ``s`` with ``2**s <= p``; the batch bound is ``2**s >= L + 1``."""
        return self.p.bit_length() - 1

    def max_batch_for_security_parameter(self) -> int:
        # L + 1 <= 2**s <= p, so this never exceeds capacity
        return min(2**self.security_parameter - 1, self.capacity)


class RandomSource:
    """Stream of uniform random bits.

    ``RandomSource()`` draws from OS entropy. ``RandomSource(seed)`` is a
    deterministic SHA-256 counter-mode stream for tests; equal seeds give
    equal draw sequences. A source is meant to be owned by one thread at a
    time.
    """

    def __init__(self, seed: int | None = None) -> None:
        if seed is not None and not 0 <= seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        self.seed = seed
        self._counter = 0
        self._buffer = b""

    @property
    def deterministic(self) -> bool:
        return self.seed is not None

    def _next_block(self) -> bytes:
        assert self.seed is not None
        block = hashlib.sha256(
            self.seed.to_bytes(8, "big") + self._counter.to_bytes(8, "big")
        ).digest()
        self._counter += 1
        return block

    def randbytes(self, n: int) -> bytes:
        if self.seed is None:
            return secrets.token_bytes(n)
        while len(self._buffer) < n:
            self._buffer += self._next_block()
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        nbytes = (k + 7) // 8
        return int.from_bytes(self.randbytes(nbytes), "big") >> (8 * nbytes - k)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        if n < 1:
            raise EmptyRangeError("cannot sample from an empty range")
        k = (n - 1).bit_length()
        while True:
            r = self.randbits(k)
            if r < n:
                return r


def sample_uniform(upper: int, exclude_zero: bool, rng: RandomSource) -> int:
    """Uniform draw from ``{0..upper-1}``, or ``{1..upper-1}`` with ``exclude_zero``."""
    low = 1 if exclude_zero else 0
    if upper - low < 1:
        raise EmptyRangeError(f"no values in [{low}, {upper})")
    return low + rng.below(upper - low)


def sample_distinct(upper: int, count: int, rng: RandomSource, exclude_zero: bool = True) -> list[int]:
    """Uniformly random ordered sample of ``count`` distinct values, without replacement.

    Floyd's subset algorithm followed by a Fisher-Yates shuffle, so the cost
    is O(count) however large ``upper`` is.
    """
    low = 1 if exclude_zero else 0
    span = upper - low
    if count < 0 or count > span:
        raise EmptyRangeError(f"cannot draw {count} distinct values from {span}")
    chosen: set[int] = set()
    for j in range(span - count, span):
        t = rng.below(j + 1)
        chosen.add(j if t in chosen else t)
    out = sorted(chosen)
    for j in range(len(out) - 1, 0, -1):
        t = rng.below(j + 1)
        out[j], out[t] = out[t], out[j]
    return [low + v for v in out]


"""Named parameter presets and their bit-length accounting."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidModulusError
from .numcore import PrimeModulus


@dataclass(frozen=True)
class Preset:
    name: str
    p: int
    # published sizes in bits
    decryptor_key_bits: int
    plaintext_bits: int
    ciphertext_bits: int

    @property
    def modulus(self) -> PrimeModulus:
        return PrimeModulus(self.p)


PRESETS: dict[str, Preset] = {
    row.name: row
    for row in (
        Preset("5", 5, 12, 3, 5),
        Preset("7", 7, 12, 3, 6),
        Preset("11", 11, 16, 4, 7),
        Preset("23", 23, 20, 5, 10),
        Preset("101", 101, 28, 7, 14),
        Preset("1009", 1009, 40, 10, 20),
        Preset("5003", 5003, 52, 13, 25),
        Preset("20011", 20011, 60, 15, 29),
        Preset("2^31-1", 2**31 - 1, 124, 31, 62),
        Preset("2^61-1", 2**61 - 1, 244, 61, 122),
        Preset("2^127-1", 2**127 - 1, 508, 127, 254),
    )
}


def parse_prime(text: str) -> PrimeModulus:
    """Parse ``preset:<name>`` or a decimal prime."""
    text = text.strip()
    if text.startswith("preset:"):
        name = text[len("preset:"):]
        try:
            return PRESETS[name].modulus
        except KeyError:
            known = ", ".join(PRESETS)
            raise InvalidModulusError(f"unknown preset {name!r} (known: {known})") from None
    try:
        value = int(text, 10)
    except ValueError:
        raise InvalidModulusError(f"not a decimal integer or preset: {text!r}") from None
    return PrimeModulus(value)

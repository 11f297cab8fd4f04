"""Independent reference formulas and brute-force oracles.

Nothing here imports blindpad; these are the textbook formulas written out
longhand so tests can compare the package against them.
"""

from itertools import product


def enc(p, x, y, m, z):
    b = (p * m + z) % (p * p)
    return (p * x * b * b + p * y * b + b) % (p * p)


def dec(p, x, y, c):
    z = c % p
    t = (p * (-x) * z * z + p * (-y) * z + c) % (p * p)
    assert (t - z) % p == 0
    return (t - z) // p


def map_(p, c1, m1, c2):
    if c1 % p != c2 % p:
        return None
    return ((c2 - c1 + p * m1) % (p * p)) // p


def inverse_brute(a, n):
    return next(b for b in range(n) if a * b % n == 1)


def consistent_keys(p, pairs):
    """All keys (x, y) under which every (m, c) pair encrypts with nonce c mod p."""
    return [
        (x, y)
        for x, y in product(range(p), repeat=2)
        if all(enc(p, x, y, m, c % p) == c for m, c in pairs)
    ]

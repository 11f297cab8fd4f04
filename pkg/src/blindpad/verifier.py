"""Exact perfect-secrecy checks by exhaustive enumeration at small primes.

Every probability here is an integer count over an integer total, held as
:class:`fractions.Fraction`; nothing is sampled and nothing is a float.

Why uniform enumeration is enough
---------------------------------
Each check enumerates all hidden randomness (keys, nonces, the selected
index) uniformly and every message value once. The quantity compared is a
conditional probability of the form ``Pr[obs | message cell]`` or
``Pr[M = m | obs]``. For the first form the prior on messages cancels
outright: conditioning fixes the message cell, and only the scheme's own
randomness is left, so counts under uniform enumeration *are* the
definitional probabilities for every prior. For the second form, write
``Pr[M = m | obs] = Pr[obs | m] Pr[m] / sum_m' Pr[obs | m'] Pr[m']``;
posterior equals prior for every prior exactly when ``Pr[obs | m]`` does
not depend on ``m`` (on the support), and that is what the count tables
compare. So a pass under uniform enumeration is a pass for all priors.

Enumeration sizes
-----------------
* leak-freeness against Alice, p=7: 7^2 message pairs x 30 nonce pairs x
  49 keys = 72,030 encryptions.
* blindness against the Decryptor, p=7: 49 keys x 7 messages x 6 nonces.
* leak-freeness against the Encryptor, p=5, L=4: 625 message vectors x
  24 nonce orders x 25 keys x 4 choices x 25 blinding-key pairs
  = 37.5 million transcripts.

The last one is organised so it stays desk-scale: the distribution of
``(i, w, w')`` depends only on the inner key and the ciphertext residues,
and whether the posterior over M matches the prior depends on the message
vector only through which positions hold equal messages. Both are
memoised; every transcript is still accounted for.

Each check also has deliberately broken variants, because a verifier
that never fails verifies nothing.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping

import numpy as np

from . import twopad
from .errors import VerificationBoundError
from .numcore import PrimeModulus
from .twopad import TwoPadKey

__all__ = [
    "DistributionTable",
    "VerificationReport",
    "recheck_counterexample",
    "verify_blindness_decryptor",
    "verify_leakfree_alice",
    "verify_leakfree_encryptor",
    "verify_ordinary_secrecy",
]

SHANNON_MAX_N = 10**4
ALICE_MAX_P = 7
BLIND_MAX_P = 7
ENCRYPTOR_P = 5
_SAMPLE_TABLES = 4


@dataclass(frozen=True)
class DistributionTable:
    condition: str
    probabilities: Mapping[Hashable, Fraction]

    def __post_init__(self) -> None:
        total = sum(self.probabilities.values(), Fraction(0))
        if total != 1:
            raise AssertionError(f"table for {self.condition} sums to {total}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "probabilities": {_key_str(k): str(v) for k, v in self.probabilities.items()},
        }


@dataclass(frozen=True)
class VerificationReport:
    definition: str
    variant: str
    p: int
    L: int | None
    passed: bool
    cases_checked: int
    counterexample: dict[str, Any] | None = None
    tables: tuple[DistributionTable, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.passed and self.counterexample is None:
            raise AssertionError("a failing report must carry a counterexample")

    def to_dict(self) -> dict[str, Any]:
        return {
            "definition": self.definition,
            "variant": self.variant,
            "p": self.p,
            "L": self.L,
            "passed": self.passed,
            "cases_checked": self.cases_checked,
            "counterexample": _jsonable(self.counterexample),
            "details": _jsonable(self.details),
            "tables": [t.to_dict() for t in self.tables],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        params = f"p={self.p}" if self.L is None else f"p={self.p} L={self.L}"
        if self.definition == "shannon":
            params = f"n={self.p}"
        lines = [
            f"{self.definition} [{self.variant}] {params}: {'PASS' if self.passed else 'FAIL'}",
            f"  cases checked: {self.cases_checked}",
        ]
        for key, value in self.details.items():
            lines.append(f"  {key}: {_jsonable(value)}")
        if self.counterexample is not None:
            lines.append("  counterexample:")
            for key, value in self.counterexample.items():
                lines.append(f"    {key} = {_jsonable(value)}")
        return "\n".join(lines)


def _key_str(key: Hashable) -> str:
    return ",".join(map(str, key)) if isinstance(key, tuple) else str(key)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, TwoPadKey):
        return [value.x_k, value.y_k]
    return value


def _as_modulus(p: PrimeModulus | int) -> PrimeModulus:
    return p if isinstance(p, PrimeModulus) else PrimeModulus(p)


# ---------------------------------------------------------------- Shannon

SHANNON_VARIANTS: dict[str, Callable[[int], range]] = {
    "shipped": lambda n: range(n),
    # keys limited to even residues: half the ciphertexts unreachable per message
    "even_keys": lambda n: range(0, n, 2),
}


def _pad_counts(n: int, keys: np.ndarray, m: int) -> np.ndarray:
    return np.bincount((m + keys) % n, minlength=n)


def verify_ordinary_secrecy(n: int, variant: str = "shipped") -> VerificationReport:
    """Check ``Pr[Enc(K, m1) = c] == Pr[Enc(K, m2) = c]`` for the additive pad on Z_n."""
    if n > SHANNON_MAX_N:
        raise VerificationBoundError(f"n={n} exceeds enumeration bound {SHANNON_MAX_N}")
    if n < 2:
        raise VerificationBoundError("n must be at least 2")
    keys = np.fromiter(SHANNON_VARIANTS[variant](n), dtype=np.int64)
    K = len(keys)
    reference = _pad_counts(n, keys, 0)
    tables = []
    counterexample = None
    for m in range(n):
        counts = _pad_counts(n, keys, m)
        if len(tables) < _SAMPLE_TABLES:
            tables.append(DistributionTable(
                f"C | M={m}",
                {c: Fraction(int(k), K) for c, k in enumerate(counts) if k},
            ))
        diff = np.nonzero(counts != reference)[0]
        if diff.size:
            c = int(diff[0])
            counterexample = {
                "m1": 0, "m2": m, "c": c,
                "pr_c_given_m1": Fraction(int(reference[c]), K),
                "pr_c_given_m2": Fraction(int(counts[c]), K),
            }
            break
    return VerificationReport(
        "shannon", variant, n, None, counterexample is None,
        cases_checked=n * n, counterexample=counterexample, tables=tuple(tables),
        details={"key_space": K},
    )


# ------------------------------------------------- leak-freeness vs Alice

ALICE_VARIANTS: dict[str, Callable[[PrimeModulus], list[TwoPadKey]]] = {
    "shipped": lambda p: list(twopad.all_keys(p)),
    # y_k pinned to 0: only p keys left for p^2 possible ciphertext pairs
    "y_zero": lambda p: [TwoPadKey(x, 0) for x in range(p.p)],
}


def verify_leakfree_alice(p: PrimeModulus | int, variant: str = "shipped") -> VerificationReport:
    """One known pair ``(m1, c1)`` must say nothing about ``c2`` with a different residue.

    For every ``m1, m2, m`` and every ``c1, c2`` with distinct nonzero
    residues, checks ``Pr[(c1, c2) | m1, m2] == Pr[(c1, c2) | m1, m]``, each
    probability taken over the key with the nonces fixed to the residues the
    ciphertexts expose. Also checks every such probability is exactly
    ``1/p^2``: exactly one key explains any two residue-distinct pairs.
    """
    p = _as_modulus(p)
    if p.p > ALICE_MAX_P:
        raise VerificationBoundError(f"p={p.p} exceeds enumeration bound {ALICE_MAX_P}")
    q, n = p.p, p.p_squared
    keys = ALICE_VARIANTS[variant](p)
    K = len(keys)
    enc = {
        (key, m, z): twopad.encrypt_with_nonce(key, p, m, z)
        for key in keys for m in range(q) for z in range(1, q)
    }
    counts: Counter[tuple[int, int, int, int]] = Counter()
    tables = []
    for m1, m2 in itertools.product(range(q), repeat=2):
        for z1, z2 in itertools.permutations(range(1, q), 2):
            cell: Counter[tuple[int, int]] = Counter()
            for key in keys:
                cell[enc[key, m1, z1], enc[key, m2, z2]] += 1
            for (c1, c2), k in cell.items():
                counts[m1, m2, c1, c2] += k
            table = DistributionTable(
                f"(C1, C2) | M1={m1}, M2={m2}, z1={z1}, z2={z2}",
                {pair: Fraction(k, K) for pair, k in cell.items()},
            )
            if len(tables) < _SAMPLE_TABLES:
                tables.append(table)

    target = Fraction(1, q * q)
    nonzero = [c for c in range(n) if c % q]
    seen: set[Fraction] = set()
    counterexample = None
    checked = 0
    for m1 in range(q):
        for c1 in nonzero:
            for c2 in nonzero:
                if c1 % q == c2 % q:
                    continue
                probs = [Fraction(counts[m1, m2, c1, c2], K) for m2 in range(q)]
                checked += q
                seen.update(probs)
                if counterexample is None:
                    for m in range(1, q):
                        if probs[m] != probs[0]:
                            counterexample = {
                                "kind": "equality", "m1": m1, "m2": 0, "m": m,
                                "c1": c1, "c2": c2,
                                "pr_given_m2": probs[0], "pr_given_m": probs[m],
                            }
                            break
                    else:
                        if probs[0] != target:
                            counterexample = {
                                "kind": "absolute", "m1": m1, "m2": 0,
                                "c1": c1, "c2": c2,
                                "pr_given_m2": probs[0], "expected": target,
                            }
    return VerificationReport(
        "alice", variant, q, None, counterexample is None,
        cases_checked=checked, counterexample=counterexample, tables=tuple(tables),
        details={
            "key_space": K,
            "conditional_probabilities": sorted(seen),
            "expected": target,
        },
    )


# ------------------------------------------- blindness vs the Decryptor

BLIND_VARIANTS: dict[str, Callable[[PrimeModulus], range | tuple[int, ...]]] = {
    "shipped": lambda p: range(1, p.p),
    # nonce drawn from {1, 2} only: the Decryptor's c' is no longer uniform
    "restricted_nonce": lambda p: (1, 2),
}


def verify_blindness_decryptor(p: PrimeModulus | int, variant: str = "shipped") -> VerificationReport:
    """The Decryptor's view ``(x_k, y_k, c', m')`` must not shift the distribution of M.

    Two checks, both exact:

    * for every observable, ``Pr[M = m | obs]`` equals the prior ``1/p``;
    * for every key and message, ``c'`` is uniform on Z_p minus zero, which
      is what makes the first check hold under any message prior.
    """
    p = _as_modulus(p)
    if p.p > BLIND_MAX_P:
        raise VerificationBoundError(f"p={p.p} exceeds enumeration bound {BLIND_MAX_P}")
    q = p.p
    nonces = BLIND_VARIANTS[variant](p)
    uniform = Fraction(1, q - 1)
    prior = Fraction(1, q)

    joint: dict[tuple[int, int, int, int], Counter[int]] = defaultdict(Counter)
    counterexample = None
    tables = []
    checked = 0
    for key in twopad.all_keys(p):
        for m in range(q):
            residues: Counter[int] = Counter()
            for z in nonces:
                c = twopad.encrypt_with_nonce(key, p, m, z)
                c_prime = c % q
                m_prime = twopad.decrypt(key, p, c_prime)
                residues[c_prime] += 1
                joint[key.x_k, key.y_k, c_prime, m_prime][m] += 1
            dist = {r: Fraction(k, len(nonces)) for r, k in residues.items()}
            if len(tables) < _SAMPLE_TABLES:
                tables.append(DistributionTable(f"C' | key=({key.x_k},{key.y_k}), M={m}", dist))
            for r in range(1, q):
                checked += 1
                got = dist.get(r, Fraction(0))
                if got != uniform and counterexample is None:
                    counterexample = {
                        "kind": "uniformity", "key": key, "m": m, "c_prime": r,
                        "pr_c_prime": got, "expected": uniform,
                    }

    for obs, by_m in joint.items():
        total = sum(by_m.values())
        posterior = {m: Fraction(by_m[m], total) for m in range(q)}
        checked += 1
        if len(tables) < 2 * _SAMPLE_TABLES:
            tables.append(DistributionTable(
                f"M | x_k={obs[0]}, y_k={obs[1]}, c'={obs[2]}, m'={obs[3]}",
                {m: v for m, v in posterior.items() if v},
            ))
        bad = next((m for m, v in posterior.items() if v != prior), None)
        if bad is not None and counterexample is None:
            counterexample = {
                "kind": "posterior", "key": TwoPadKey(obs[0], obs[1]),
                "c_prime": obs[2], "m_prime": obs[3], "m": bad,
                "pr_m_given_view": posterior[bad], "prior": prior,
            }
    return VerificationReport(
        "blind", variant, q, None, counterexample is None,
        cases_checked=checked, counterexample=counterexample, tables=tuple(tables),
        details={"nonces": list(nonces), "observables": len(joint)},
    )


# ------------------------------------ leak-freeness vs the Encryptor

ENCRYPTOR_VARIANTS = ("shipped", "no_outer")


def _index_pattern(ms: tuple[int, ...]) -> tuple[int, ...]:
    """Canonical labelling of which positions hold equal messages."""
    first: dict[int, int] = {}
    return tuple(first.setdefault(m, len(first)) for m in ms)


def _blind_exchange_counts(
    key: TwoPadKey, p: PrimeModulus, residues: tuple[int, ...], blinding: Iterable[int]
) -> dict[tuple[int, int], Counter[int]]:
    """Count ``(w, w')`` outcomes per chosen index over all blinding keys."""
    q = p.p
    blinding = tuple(blinding)
    out: dict[tuple[int, int], Counter[int]] = defaultdict(Counter)
    for i, c_prime in enumerate(residues):
        m_prime = twopad.decrypt(key, p, c_prime)
        for k_C in blinding:
            for k_P in blinding:
                out[(c_prime + k_C) % q, (m_prime + k_P) % q][i] += 1
    return out


def _posterior_mismatch(
    exchange: Mapping[tuple[int, int], Counter[int]], pattern: tuple[int, ...], L: int
) -> tuple[tuple[int, int], int, Fraction, Fraction] | None:
    """First ``((w, w'), label, posterior, prior)`` where the view shifts M, if any."""
    groups: dict[int, list[int]] = defaultdict(list)
    for i, label in enumerate(pattern):
        groups[label].append(i)
    for ww, by_i in exchange.items():
        total = sum(by_i.values())
        for label, idx in groups.items():
            posterior = Fraction(sum(by_i[i] for i in idx), total)
            prior = Fraction(len(idx), L)
            if posterior != prior:
                return ww, label, posterior, prior
    return None


def verify_leakfree_encryptor(
    p: PrimeModulus | int, L: int, variant: str = "shipped"
) -> VerificationReport:
    """The Encryptor, watching ``w`` and ``w'``, must learn nothing about Alice's choice.

    The Encryptor knows the inner key, every message ``m_j`` and every
    ciphertext ``c_j``. With ``M = M_i`` for a uniformly chosen ``i``, the
    check is ``Pr[M = m | m_vec, c_vec, key, w, w'] == Pr[M = m | m_vec]``
    over all transcripts. ``no_outer`` sends ``c'`` and ``m'`` unpadded.
    """
    p = _as_modulus(p)
    if p.p != ENCRYPTOR_P:
        raise VerificationBoundError(f"encryptor check is bounded to p={ENCRYPTOR_P}")
    if not 1 <= L <= p.capacity:
        raise VerificationBoundError(f"L must be in [1, {p.capacity}]")
    if variant not in ENCRYPTOR_VARIANTS:
        raise KeyError(variant)
    q = p.p
    blinding = range(q) if variant == "shipped" else (0,)

    exchange_cache: dict[tuple[TwoPadKey, tuple[int, ...]], dict] = {}
    verdict_cache: dict[tuple[TwoPadKey, tuple[int, ...], tuple[int, ...]], Any] = {}
    transcripts = 0
    counterexample = None
    tables: list[DistributionTable] = []
    per_exchange = L * len(blinding) ** 2
    for key in twopad.all_keys(p):
        for nonces in itertools.permutations(range(1, q), L):
            for ms in itertools.product(range(q), repeat=L):
                cs = tuple(twopad.encrypt_with_nonce(key, p, m, z) for m, z in zip(ms, nonces))
                residues = tuple(c % q for c in cs)
                transcripts += per_exchange
                if (key, residues) not in exchange_cache:
                    exchange_cache[key, residues] = _blind_exchange_counts(key, p, residues, blinding)
                exchange = exchange_cache[key, residues]
                pattern = _index_pattern(ms)
                memo = (key, residues, pattern)
                if memo not in verdict_cache:
                    verdict_cache[memo] = _posterior_mismatch(exchange, pattern, L)
                    if len(tables) < _SAMPLE_TABLES:
                        (ww, by_i), = itertools.islice(exchange.items(), 1)
                        total = sum(by_i.values())
                        post: Counter[int] = Counter()
                        for i, k in by_i.items():
                            post[ms[i]] += k
                        tables.append(DistributionTable(
                            f"M | key=({key.x_k},{key.y_k}), m={ms}, c={cs}, w={ww[0]}, w'={ww[1]}",
                            {m: Fraction(k, total) for m, k in post.items()},
                        ))
                mismatch = verdict_cache[memo]
                if mismatch is not None and counterexample is None:
                    (w, w_prime), label, posterior, prior = mismatch
                    m = ms[pattern.index(label)]
                    counterexample = {
                        "key": key, "messages": ms, "ciphertexts": cs,
                        "w": w, "w_prime": w_prime, "m": m,
                        "pr_m_given_view": posterior, "pr_m_given_messages": prior,
                    }
    return VerificationReport(
        "encryptor", variant, q, L, counterexample is None,
        cases_checked=transcripts, counterexample=counterexample, tables=tuple(tables),
        details={"distinct_checks": len(verdict_cache)},
    )


# ------------------------------------------------------------ rechecking

def _recheck_shannon(report: VerificationReport) -> bool:
    ce, n = report.counterexample, report.p
    keys = list(SHANNON_VARIANTS[report.variant](n))
    pr1 = Fraction(sum((ce["m1"] + k) % n == ce["c"] for k in keys), len(keys))
    pr2 = Fraction(sum((ce["m2"] + k) % n == ce["c"] for k in keys), len(keys))
    return pr1 != pr2 and (pr1, pr2) == (ce["pr_c_given_m1"], ce["pr_c_given_m2"])


def _recheck_alice(report: VerificationReport) -> bool:
    ce, p = report.counterexample, PrimeModulus(report.p)
    keys = ALICE_VARIANTS[report.variant](p)
    z1, z2 = ce["c1"] % p.p, ce["c2"] % p.p

    def pr(m2: int) -> Fraction:
        hits = sum(
            twopad.encrypt_with_nonce(k, p, ce["m1"], z1) == ce["c1"]
            and twopad.encrypt_with_nonce(k, p, m2, z2) == ce["c2"]
            for k in keys
        )
        return Fraction(hits, len(keys))

    if ce["kind"] == "equality":
        a, b = pr(ce["m2"]), pr(ce["m"])
        return a != b and (a, b) == (ce["pr_given_m2"], ce["pr_given_m"])
    a = pr(ce["m2"])
    return a != ce["expected"] and a == ce["pr_given_m2"]


def _recheck_blind(report: VerificationReport) -> bool:
    ce, p = report.counterexample, PrimeModulus(report.p)
    nonces = BLIND_VARIANTS[report.variant](p)
    key = ce["key"]
    if ce["kind"] == "uniformity":
        hits = sum(twopad.encrypt_with_nonce(key, p, ce["m"], z) % p.p == ce["c_prime"] for z in nonces)
        got = Fraction(hits, len(nonces))
        return got != ce["expected"] and got == ce["pr_c_prime"]
    by_m: Counter[int] = Counter()
    for m in range(p.p):
        for z in nonces:
            c_prime = twopad.encrypt_with_nonce(key, p, m, z) % p.p
            if c_prime == ce["c_prime"] and twopad.decrypt(key, p, c_prime) == ce["m_prime"]:
                by_m[m] += 1
    got = Fraction(by_m[ce["m"]], sum(by_m.values()))
    return got != ce["prior"] and got == ce["pr_m_given_view"]


def _recheck_encryptor(report: VerificationReport) -> bool:
    ce, p = report.counterexample, PrimeModulus(report.p)
    q = p.p
    blinding = range(q) if report.variant == "shipped" else (0,)
    key, ms, cs = ce["key"], ce["messages"], ce["ciphertexts"]
    hits: Counter[int] = Counter()
    for i, c in enumerate(cs):
        c_prime = c % q
        m_prime = twopad.decrypt(key, p, c_prime)
        for k_C in blinding:
            for k_P in blinding:
                if ((c_prime + k_C) % q, (m_prime + k_P) % q) == (ce["w"], ce["w_prime"]):
                    hits[ms[i]] += 1
    posterior = Fraction(hits[ce["m"]], sum(hits.values()))
    prior = Fraction(ms.count(ce["m"]), len(ms))
    return posterior != prior and (posterior, prior) == (ce["pr_m_given_view"], ce["pr_m_given_messages"])


_RECHECKS = {
    "shannon": _recheck_shannon,
    "alice": _recheck_alice,
    "blind": _recheck_blind,
    "encryptor": _recheck_encryptor,
}


def recheck_counterexample(report: VerificationReport) -> bool:
    """Recount just the counterexample's conditioning assignment by brute force.

    True when the recount reproduces the same unequal probabilities.
    """
    if report.counterexample is None:
        raise ValueError("report has no counterexample")
    return _RECHECKS[report.definition](report)


VERIFIERS = {
    "shannon": verify_ordinary_secrecy,
    "alice": verify_leakfree_alice,
    "blind": verify_blindness_decryptor,
    "encryptor": verify_leakfree_encryptor,
}

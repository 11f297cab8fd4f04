"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import itertools
import random
import threading
import time
from fractions import Fraction

import pytest

from blindpad import net, twopad
from blindpad.errors import SingleUseViolation
from blindpad.keystore import keystore_load, keystore_save, records_from_material
from blindpad.numcore import PrimeModulus, RandomSource
from blindpad.params import PRESETS
from blindpad.protocol import (
    AliceView,
    BlindRequest,
    CiphertextBatch,
    SessionKeyMaterial,
    alice_finish,
    alice_receive,
    alice_request,
    dealer_issue,
    decryptor_respond,
    encryptor_publish,
)
from blindpad.outerpad import OuterKey
from blindpad.twopad import TwoPadKey, encrypt_with_nonce
from blindpad.verifier import (
    recheck_counterexample,
    verify_blindness_decryptor,
    verify_leakfree_alice,
    verify_leakfree_encryptor,
    verify_ordinary_secrecy,
)
from blindpad.wire import encode_frame
import reference
from conftest import ACCEPTANCE_LINES


def record(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_exhaustive_correctness():
    start = time.perf_counter()
    failures = total = 0
    for q in (5, 7, 11):
        p = PrimeModulus(q)
        for key in twopad.all_keys(p):
            for z in range(1, q):
                for m in range(q):
                    total += 1
                    failures += twopad.decrypt(key, p, encrypt_with_nonce(key, p, m, z)) != m
    elapsed = time.perf_counter() - start
    record(1, "2PAD decrypt(encrypt(m)) = m exhaustively for p in {5,7,11}",
           failures == 0 and elapsed < 10, f"{total} cases, {failures} failures, {elapsed:.2f}s < 10s")


def test_02_worked_trace():
    p = PrimeModulus(5)
    key = TwoPadKey(2, 3)
    # expected values come from the longhand formulas, not from blindpad
    c_ref = reference.enc(5, 2, 3, 4, 1)
    m_prime_ref = reference.dec(5, 2, 3, c_ref % 5)
    m_ref = reference.map_(5, c_ref % 5, m_prime_ref, c_ref)
    assert (c_ref, m_prime_ref, m_ref) == (21, 0, 4)

    c = encrypt_with_nonce(key, p, 4, 1)
    m = twopad.decrypt(key, p, c)
    sid = bytes(16)
    material = SessionKeyMaterial(sid, p, 1, key, (OuterKey(0, 25),), OuterKey(0, 5), OuterKey(0, 5))
    alice = material.alice_view()
    state = alice_receive(alice, CiphertextBatch(sid, (c,)))
    req = alice_request(state, 1, alice)
    resp = decryptor_respond(material.decryptor_view(), req)
    m_i = alice_finish(state, resp, alice)
    ok = (c, m, resp.w_prime, m_i) == (c_ref, 4, m_prime_ref, m_ref)
    record(2, "worked trace p=5 key=(2,3) m=4 z=1", ok,
           f"c={c} dec={m} m'={resp.w_prime} Map(1,m',21)={m_i}")


def test_03_key_uniqueness():
    cases = bad = 0
    for q in (5, 7):
        p = PrimeModulus(q)
        for key in twopad.all_keys(p):
            for m1, m2 in itertools.product(range(q), repeat=2):
                for z1, z2 in itertools.permutations(range(1, q), 2):
                    c1 = encrypt_with_nonce(key, p, m1, z1)
                    c2 = encrypt_with_nonce(key, p, m2, z2)
                    consistent = reference.consistent_keys(q, [(m1, c1), (m2, c2)]) if q == 5 else None
                    cases += 1
                    if consistent is not None and consistent != [(key.x_k, key.y_k)]:
                        bad += 1
                    if twopad.recover_key((m1, c1), (m2, c2), p) != key:
                        bad += 1
    # brute-force count over all p^2 keys for every residue-distinct pair at p=7
    p = PrimeModulus(7)
    enc = {(x, y, m, z): reference.enc(7, x, y, m, z)
           for x, y, m, z in itertools.product(range(7), range(7), range(7), range(1, 7))}
    counts = {}
    for (x, y, m1, z1), c1 in enc.items():
        for m2, z2 in itertools.product(range(7), range(1, 7)):
            if z2 != z1:
                pair = (m1, c1, m2, enc[x, y, m2, z2])
                counts[pair] = counts.get(pair, 0) + 1
    bad += sum(v != 1 for v in counts.values())
    # every (m1, c1, m2, c2) with distinct nonzero residues must appear: 7 * 42 * 7 * 35
    bad += len(counts) != 7 * 42 * 7 * 35
    record(3, "two residue-distinct pairs fix exactly one key; recover_key finds it",
           bad == 0, f"{cases} recoveries, {len(counts)} brute-force counts at p=7, {bad} failures")


def test_04_leakfree_alice():
    results = []
    for q in (5, 7):
        report = verify_leakfree_alice(q)
        results.append(report.passed
                       and report.details["conditional_probabilities"] == [Fraction(1, q * q)])
    broken = verify_leakfree_alice(5, variant="y_zero")
    ok = all(results) and not broken.passed and recheck_counterexample(broken)
    record(4, "leak-freeness against Alice exact at p=5,7 (all probabilities 1/p^2); y_k=0 fails", ok)


def test_05_blindness():
    ok = all(verify_blindness_decryptor(q).passed for q in (5, 7))
    broken = [verify_blindness_decryptor(q, variant="restricted_nonce") for q in (5, 7)]
    ok = ok and all(not b.passed and recheck_counterexample(b) for b in broken)
    record(5, "blindness against the Decryptor exact at p=5,7; restricted nonce fails", ok)


def test_06_leakfree_encryptor():
    start = time.perf_counter()
    ok = all(verify_leakfree_encryptor(5, L).passed for L in (2, 4))
    broken = [verify_leakfree_encryptor(5, L, variant="no_outer") for L in (2, 4)]
    ok = ok and all(not b.passed and recheck_counterexample(b) for b in broken)
    elapsed = time.perf_counter() - start
    record(6, "leak-freeness against the Encryptor exact at p=5, L=2,4; no outer layer fails",
           ok and elapsed < 60, f"{elapsed:.1f}s < 60s")


def test_07_shannon():
    ok = all(verify_ordinary_secrecy(n).passed for n in (5, 25))
    record(7, "outer pad Shannon-secure exactly for n=5,25", ok)


def test_08_parameter_table():
    mismatches = []
    for preset in PRESETS.values():
        p = preset.modulus
        dealt, _ = dealer_issue(p, 1, RandomSource(0))
        stored_bits = records_from_material(dealt)["decryptor"].key_bits
        got = (p.decryptor_key_bits, p.plaintext_bits, p.ciphertext_bits, stored_bits)
        want = (preset.decryptor_key_bits, preset.plaintext_bits, preset.ciphertext_bits,
                preset.decryptor_key_bits)
        if got != want:
            mismatches.append((preset.name, got, want))
    record(8, "parameter table: key/plaintext/ciphertext bits for all 11 presets",
           len(PRESETS) == 11 and not mismatches, f"mismatches={mismatches}")


def _session_files(tmp_path, p, rng, tag):
    material, (enc, _, _) = dealer_issue(p, 4, rng)
    recs = records_from_material(material)
    alice_path, dec_path = tmp_path / f"{tag}.alice", tmp_path / f"{tag}.dec"
    keystore_save(recs["alice"], alice_path)
    keystore_save(recs["decryptor"], dec_path)
    return enc, alice_path, dec_path


def _serve(dec_path, requests):
    server = net.DecryptorServer(("127.0.0.1", 0), dec_path)

    def loop():
        for _ in range(requests):
            server.handle_request()

    thread = threading.Thread(target=loop, daemon=True)
    thread.start()
    return server, thread


def _stop(server, thread):
    thread.join(timeout=10)
    server.server_close()


@pytest.mark.parametrize("q", [5, 2**61 - 1], ids=["p5", "p2^61-1"])
def test_09_end_to_end(tmp_path, q):
    p = PrimeModulus(q)
    rng = RandomSource(q % 2**64)
    r = random.Random(q)
    trials = correct = refused = restarts_refused = 0
    start = time.perf_counter()
    for trial in range(100):
        msgs = [r.randrange(q) for _ in range(4)]
        for i in range(1, 5):
            trials += 1
            enc, alice_path, dec_path = _session_files(tmp_path, p, rng, f"{trial}-{i}")
            batch_frame = encode_frame(encryptor_publish(enc, msgs, rng), p)
            restart = i == 1 and trial % 10 == 0
            server, thread = _serve(dec_path, 2)
            alice = keystore_load(alice_path)
            correct += net.fetch(alice, batch_frame, i, server.server_address) == msgs[i - 1]
            try:
                net.fetch(alice, batch_frame, i, server.server_address)
            except SingleUseViolation:
                refused += 1
            _stop(server, thread)
            if restart:
                server, thread = _serve(dec_path, 1)
                try:
                    net.fetch(alice, batch_frame, 1 + i % 4, server.server_address)
                except SingleUseViolation:
                    restarts_refused += 1
                _stop(server, thread)
    elapsed = time.perf_counter() - start
    record(9, f"deal/encrypt/serve/fetch over TCP at p={'5' if q == 5 else '2^61-1'}",
           correct == refused == trials and restarts_refused == 10,
           f"{correct}/{trials} correct, {refused}/{trials} second fetches refused, "
           f"{restarts_refused}/10 refused after restart, {elapsed:.1f}s")


def test_10_large_parameter_smoke():
    p = PrimeModulus(2**127 - 1)
    rng = RandomSource(127)
    start = time.perf_counter()
    failures = 0
    key = twopad.gen(p, rng)
    for n in range(10**4):
        if n % 100 == 0:
            key = twopad.gen(p, rng)
        m = rng.below(p.p)
        failures += twopad.decrypt(key, p, twopad.encrypt(key, p, m, rng)) != m
    for _ in range(10**3):
        key = twopad.gen(p, rng)
        z = 1 + rng.below(p.p - 1)
        m1, m2 = rng.below(p.p), rng.below(p.p)
        c1 = encrypt_with_nonce(key, p, m1, z)
        c2 = encrypt_with_nonce(key, p, m2, z)
        failures += twopad.map_ciphertext(c1, m1, c2, p) != m2
    elapsed = time.perf_counter() - start
    record(10, "10^4 round-trips and 10^3 Map transformations at p=2^127-1",
           failures == 0 and elapsed < 30, f"{failures} failures, {elapsed:.2f}s < 30s")

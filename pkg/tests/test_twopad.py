import itertools
import random

import pytest
from hypothesis import given, strategies as st

from blindpad import twopad
from blindpad.errors import CapacityError, DegenerateSystemError, EmptyBatchError, InvalidCiphertextError
from blindpad.numcore import PrimeModulus, RandomSource
from blindpad.twopad import TwoPadKey, encrypt_with_nonce
import reference

P5 = PrimeModulus(5)
P7 = PrimeModulus(7)


def test_gen_range_and_determinism():
    key = twopad.gen(P5, RandomSource(3))
    assert 0 <= key.x_k < 5 and 0 <= key.y_k < 5
    assert twopad.gen(P5, RandomSource(3)) == key


def test_all_keys_enumerates_each_once():
    keys = list(twopad.all_keys(P5))
    assert len(keys) == 25 == len(set(keys))


def test_encrypt_worked_trace():
    assert encrypt_with_nonce(TwoPadKey(2, 3), P5, 4, 1) == 21
    assert encrypt_with_nonce(TwoPadKey(0, 0), P5, 0, 1) == 1


def test_decrypt_worked_trace():
    assert twopad.decrypt(TwoPadKey(2, 3), P5, 21) == 4
    assert twopad.decrypt(TwoPadKey(0, 0), P5, 1) == 0


def test_encrypt_exposes_nonce(small_p, rng):
    for key in twopad.all_keys(small_p):
        for m in range(small_p.p):
            for z in range(1, small_p.p):
                c = encrypt_with_nonce(key, small_p, m, z)
                assert c % small_p.p == z
                assert c == reference.enc(small_p.p, key.x_k, key.y_k, m, z)


def test_encrypt_random_nonce_nonzero_at_large_p():
    p = PrimeModulus(2**61 - 1)
    rng = RandomSource(5)
    key = twopad.gen(p, rng)
    for _ in range(10**4):
        m = rng.below(p.p)
        c = twopad.encrypt(key, p, m, rng)
        assert c % p.p != 0
        assert twopad.decrypt(key, p, c) == m


def test_round_trip_exhaustive(small_p):
    q = small_p.p
    for key in twopad.all_keys(small_p):
        for m in range(q):
            for z in range(1, q):
                assert twopad.decrypt(key, small_p, encrypt_with_nonce(key, small_p, m, z)) == m


def test_decrypt_matches_reference_on_every_ciphertext():
    # including residue-0 ciphertexts, which decrypt totally
    for key in twopad.all_keys(P5):
        for c in range(25):
            assert twopad.decrypt(key, P5, c) == reference.dec(5, key.x_k, key.y_k, c)


def test_decrypt_rejects_out_of_range():
    with pytest.raises(InvalidCiphertextError):
        twopad.decrypt(TwoPadKey(0, 0), P5, 25)


def test_map_examples():
    assert twopad.map_ciphertext(21, 4, 11, P5) == 2
    assert twopad.map_ciphertext(21, 4, 21, P5) == 4
    assert twopad.map_ciphertext(21, 4, 12, P5) is None


@pytest.mark.parametrize("p", [P5, P7], ids=["p5", "p7"])
def test_map_transformation_exhaustive(p):
    q = p.p
    for key in twopad.all_keys(p):
        for z in range(1, q):
            cs = [encrypt_with_nonce(key, p, m, z) for m in range(q)]
            for m1, m2 in itertools.product(range(q), repeat=2):
                assert twopad.map_ciphertext(cs[m1], m1, cs[m2], p) == m2


def test_encrypt_batch_full_capacity(rng):
    for _ in range(50):
        key = twopad.gen(P5, rng)
        cs = twopad.encrypt_batch(key, P5, [0, 1, 2, 3], rng)
        assert {c % 5 for c in cs} == {1, 2, 3, 4}


def test_encrypt_batch_limits(rng):
    key = twopad.gen(P5, rng)
    with pytest.raises(CapacityError):
        twopad.encrypt_batch(key, P5, [0] * 5, rng)
    with pytest.raises(EmptyBatchError):
        twopad.encrypt_batch(key, P5, [], rng)


def test_encrypt_batch_distinct_and_decrypts(rng):
    for _ in range(200):
        key = twopad.gen(P7, rng)
        msgs = [rng.below(7) for _ in range(3)]
        cs = twopad.encrypt_batch(key, P7, msgs, rng)
        assert len({c % 7 for c in cs}) == 3
        assert [twopad.decrypt(key, P7, c) for c in cs] == msgs


@given(st.data())
def test_encrypt_batch_never_repeats_residue(data):
    q = data.draw(st.sampled_from([5, 7, 11, 13]))
    p = PrimeModulus(q)
    L = data.draw(st.integers(1, q - 1))
    seed = data.draw(st.integers(0, 2**64 - 1))
    rng = RandomSource(seed)
    cs = twopad.encrypt_batch(twopad.gen(p, rng), p, [0] * L, rng)
    assert len({c % q for c in cs}) == L


def test_recover_key_example():
    assert twopad.recover_key((4, 21), (1, 2), P5) == TwoPadKey(2, 3)
    assert reference.consistent_keys(5, [(4, 21), (1, 2)]) == [(2, 3)]


def test_recover_key_errors():
    with pytest.raises(DegenerateSystemError):
        twopad.recover_key((4, 21), (2, 11), P5)
    with pytest.raises(InvalidCiphertextError):
        twopad.recover_key((4, 21), (0, 5), P5)


@pytest.mark.parametrize("p", [P5, P7], ids=["p5", "p7"])
def test_recover_key_exhaustive(p):
    q = p.p
    for key in twopad.all_keys(p):
        for m1, m2 in itertools.product(range(q), repeat=2):
            for z1, z2 in itertools.permutations(range(1, q), 2):
                c1 = encrypt_with_nonce(key, p, m1, z1)
                c2 = encrypt_with_nonce(key, p, m2, z2)
                assert twopad.recover_key((m1, c1), (m2, c2), p) == key


def test_large_prime_map_and_recovery():
    p = PrimeModulus(2**127 - 1)
    r = random.Random(11)
    key = TwoPadKey(r.randrange(p.p), r.randrange(p.p))
    for _ in range(100):
        z1, z2 = r.randrange(1, p.p), r.randrange(1, p.p)
        m1, m2, m3 = (r.randrange(p.p) for _ in range(3))
        c1 = encrypt_with_nonce(key, p, m1, z1)
        c3 = encrypt_with_nonce(key, p, m3, z1)
        assert twopad.map_ciphertext(c1, m1, c3, p) == m3
        if z1 != z2:
            c2 = encrypt_with_nonce(key, p, m2, z2)
            assert twopad.recover_key((m1, c1), (m2, c2), p) == key

"""Reservation envelope and ordinary-signature tests."""

import numpy as np
import pytest

from parkpir.envelope import (
    EnvelopeError,
    ed25519_keypair,
    ed25519_sign,
    ed25519_verify,
    open_sealed,
    pack_reservation,
    seal,
    unpack_reservation,
    x25519_keypair,
)


class TestSealedBox:
    def test_round_trip(self):
        rng = np.random.default_rng(1)
        secret, pub = x25519_keypair(rng)
        pk_d = rng.bytes(32)
        pt = pack_reservation(pk_d, 1700000000, 3600)
        ct = seal(pub, pt, rng)
        assert unpack_reservation(open_sealed(secret, ct)) == (pk_d, 1700000000, 3600)

    def test_bit_flip_fails(self):
        rng = np.random.default_rng(2)
        secret, pub = x25519_keypair(rng)
        ct = bytearray(seal(pub, b"payload-bytes", rng))
        ct[-1] ^= 0x01
        with pytest.raises(EnvelopeError):
            open_sealed(secret, bytes(ct))

    def test_wrong_key_fails(self):
        rng = np.random.default_rng(3)
        _, pub = x25519_keypair(rng)
        other_secret, _ = x25519_keypair(rng)
        ct = seal(pub, b"payload", rng)
        with pytest.raises(EnvelopeError):
            open_sealed(other_secret, ct)

    def test_encryption_randomized(self):
        rng = np.random.default_rng(4)
        _, pub = x25519_keypair(rng)
        assert seal(pub, b"same", rng) != seal(pub, b"same", rng)

    def test_short_envelope_rejected(self):
        rng = np.random.default_rng(5)
        secret, _ = x25519_keypair(rng)
        with pytest.raises(EnvelopeError):
            open_sealed(secret, b"tiny")

    def test_deterministic_under_seed(self):
        a = seal(x25519_keypair(np.random.default_rng(6))[1], b"m", np.random.default_rng(7))
        b = seal(x25519_keypair(np.random.default_rng(6))[1], b"m", np.random.default_rng(7))
        assert a == b


class TestChallengeSignatures:
    def test_round_trip(self):
        rng = np.random.default_rng(8)
        secret, pub = ed25519_keypair(rng)
        gamma = rng.bytes(24)
        sig = ed25519_sign(secret, gamma)
        assert ed25519_verify(pub, gamma, sig)

    def test_wrong_challenge_rejected(self):
        rng = np.random.default_rng(9)
        secret, pub = ed25519_keypair(rng)
        sig = ed25519_sign(secret, b"challenge-1")
        assert not ed25519_verify(pub, b"challenge-2", sig)

    def test_wrong_key_rejected(self):
        rng = np.random.default_rng(10)
        secret, _ = ed25519_keypair(rng)
        _, other_pub = ed25519_keypair(rng)
        sig = ed25519_sign(secret, b"gamma")
        assert not ed25519_verify(other_pub, b"gamma", sig)

    def test_seeded_keys_reproducible(self):
        _, pub_a = ed25519_keypair(np.random.default_rng(11))
        _, pub_b = ed25519_keypair(np.random.default_rng(11))
        assert pub_a == pub_b


class TestReservationCodec:
    def test_layout(self):
        pt = pack_reservation(bytes(32), 1, 2)
        assert len(pt) == 48
        assert pt[32:40] == (1).to_bytes(8, "big")

    def test_bad_key_length(self):
        with pytest.raises(ValueError):
            pack_reservation(bytes(31), 0, 0)

    def test_bad_plaintext_length(self):
        with pytest.raises(ValueError):
            unpack_reservation(bytes(47))

"""Credential issuance and randomizable signature tests."""

import numpy as np
import pytest

from parkpir.credentials import (
    Certificate,
    Kdc,
    RandomizedSig,
    RegistrationError,
    credential_valid,
    driver_keygen,
    finalize_credential,
    randomized_sign,
    rand_scalar,
    schnorr_sign,
    schnorr_verify,
    verify_sig,
)
from parkpir.pairing import MockElement, count_ops, make_backend, zp_mul


@pytest.fixture(params=["mock", "curve"])
def world(request):
    groups = make_backend(request.param)
    rng = np.random.default_rng(100)
    kdc = Kdc(groups, rng)
    keys = driver_keygen(groups, kdc.gpk, "driver-1", rng)
    s1, s2 = kdc.register(keys.request())
    cred = finalize_credential(groups, kdc.gpk, keys.a2, s1, s2)
    return groups, rng, kdc, keys, cred


class TestSetup:
    def test_distinct_seeds_distinct_keys(self):
        groups = make_backend("mock")
        kdc_a = Kdc(groups, np.random.default_rng(1))
        kdc_b = Kdc(groups, np.random.default_rng(2))
        assert kdc_a.gpk.x_tilde != kdc_b.gpk.x_tilde

    def test_gpk_consistent_with_secrets(self):
        groups = make_backend("mock")
        kdc = Kdc(groups, np.random.default_rng(3))
        assert kdc.gpk.x_tilde == groups.g2 ** kdc._x
        assert kdc.gpk.y_tilde == groups.g2 ** kdc._y

    def test_rand_scalar_nonzero_in_range(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            v = rand_scalar(rng, 97)
            assert 0 < v < 97


class TestRegistration:
    def test_honest_flow_yields_valid_credential(self, world):
        groups, _, kdc, _, cred = world
        assert credential_valid(groups, kdc.gpk, cred)

    def test_tampered_gamma_tilde_rejected(self, world):
        groups, rng, kdc, _, _ = world
        keys = driver_keygen(groups, kdc.gpk, "driver-2", rng)
        bad = keys.request()
        bad = type(bad)(
            bad.driver_id, bad.a_pub, bad.gamma,
            bad.gamma_tilde * kdc.gpk.y_tilde, bad.eta, bad.pok_a2,
        )
        with pytest.raises(RegistrationError, match="pairing"):
            kdc.register(bad)

    def test_wrong_a2_proof_rejected(self, world):
        groups, rng, kdc, _, _ = world
        keys = driver_keygen(groups, kdc.gpk, "driver-3", rng)
        wrong = rand_scalar(rng, groups.order)
        forged = schnorr_sign(groups, wrong, keys.gamma, kdc.gpk.to_bytes(), tag=b"pok-a2")
        bad = keys.request()
        bad = type(bad)(
            bad.driver_id, bad.a_pub, bad.gamma, bad.gamma_tilde, bad.eta, forged
        )
        with pytest.raises(RegistrationError, match="knowledge"):
            kdc.register(bad)

    def test_bad_eta_rejected(self, world):
        groups, rng, kdc, _, _ = world
        keys = driver_keygen(groups, kdc.gpk, "driver-4", rng)
        bad = keys.request()
        bad = type(bad)(
            bad.driver_id, bad.a_pub, bad.gamma, bad.gamma_tilde,
            type(bad.eta)(bad.eta.c, (bad.eta.s + 1) % groups.order), bad.pok_a2,
        )
        with pytest.raises(RegistrationError, match="eta"):
            kdc.register(bad)

    def test_duplicate_id_rejected(self, world):
        groups, rng, kdc, keys, _ = world
        again = driver_keygen(groups, kdc.gpk, keys.driver_id, rng)
        with pytest.raises(RegistrationError, match="already"):
            kdc.register(again.request())

    def test_tracking_list_entry_recorded(self, world):
        _, _, kdc, keys, _ = world
        gamma, eta, gamma_tilde = kdc.tracking_list[keys.driver_id]
        assert gamma == keys.gamma and gamma_tilde == keys.gamma_tilde


class TestSchnorr:
    def test_round_trip_and_binding(self):
        groups = make_backend("mock")
        rng = np.random.default_rng(8)
        secret = rand_scalar(rng, groups.order)
        public = groups.g1 ** secret
        sig = schnorr_sign(groups, secret, public, b"msg", tag=b"t")
        assert schnorr_verify(groups, public, b"msg", sig, tag=b"t")
        assert not schnorr_verify(groups, public, b"other", sig, tag=b"t")
        assert not schnorr_verify(groups, public, b"msg", sig, tag=b"u")
        other = groups.g1 ** rand_scalar(rng, groups.order)
        assert not schnorr_verify(groups, other, b"msg", sig, tag=b"t")


class TestRandomizedSig:
    def test_sign_verify_round_trip(self, world):
        groups, rng, kdc, _, cred = world
        sig = randomized_sign(groups, cred, b"reserve cell 7", rng)
        assert verify_sig(groups, kdc.gpk, sig, b"reserve cell 7")

    def test_two_showings_distinct_and_valid(self, world):
        groups, rng, kdc, _, cred = world
        s1 = randomized_sign(groups, cred, b"m", rng)
        s2 = randomized_sign(groups, cred, b"m", rng)
        assert (s1.sig1, s1.sig2, s1.c, s1.s) != (s2.sig1, s2.sig2, s2.c, s2.s)
        assert verify_sig(groups, kdc.gpk, s1, b"m")
        assert verify_sig(groups, kdc.gpk, s2, b"m")

    def test_wrong_message_rejected(self, world):
        groups, rng, kdc, _, cred = world
        sig = randomized_sign(groups, cred, b"m", rng)
        assert not verify_sig(groups, kdc.gpk, sig, b"m2")

    def test_tampered_s_rejected(self, world):
        groups, rng, kdc, _, cred = world
        sig = randomized_sign(groups, cred, b"m", rng)
        bad = RandomizedSig(sig.sig1, sig.sig2, sig.c, (sig.s + 1) % groups.order)
        assert not verify_sig(groups, kdc.gpk, bad, b"m")

    def test_cross_gpk_rejected(self, world):
        groups, rng, kdc, _, cred = world
        other_kdc = Kdc(groups, np.random.default_rng(999))
        sig = randomized_sign(groups, cred, b"m", rng)
        assert not verify_sig(groups, other_kdc.gpk, sig, b"m")

    def test_identity_sig1_rejected(self, world):
        groups, rng, kdc, _, cred = world
        sig = randomized_sign(groups, cred, b"m", rng)
        ident = sig.sig1 ** 0
        assert not verify_sig(groups, kdc.gpk, RandomizedSig(ident, sig.sig2, sig.c, sig.s), b"m")

    def test_verifier_value_equals_signer_sig3(self, world):
        # fix r1, r2 and run both sides of the algebra by hand
        groups, _, kdc, _, cred = world
        r1, r2 = 12345, 67890
        sig1 = cred.sigma1 ** r1
        sig2 = cred.sigma2 ** r1
        sig3 = cred.sigma3 ** (r1 * r2 % groups.order)
        c = groups.hash_to_scalar(
            b"show", sig1.to_bytes(), sig2.to_bytes(), sig3.to_bytes(), b"m"
        )
        s = (r2 + c * cred.a2) % groups.order
        v = (
            (groups.pair(sig1, kdc.gpk.x_tilde) ** c)
            * (groups.pair(sig2, kdc.gpk.g2) ** (-c))
            * (groups.pair(sig1, kdc.gpk.y_tilde) ** s)
        )
        assert v == sig3
        assert verify_sig(groups, kdc.gpk, RandomizedSig(sig1, sig2, c, s), b"m")

    def test_wire_bytes_stable(self, world):
        groups, rng, kdc, _, cred = world
        sig = randomized_sign(groups, cred, b"m", rng)
        data = sig.to_bytes(groups.order)
        assert data == sig.to_bytes(groups.order)
        assert len(data) > 8


class TestOpCounts:
    def test_sign_costs_three_exp_one_hash(self):
        groups = make_backend("mock")
        rng = np.random.default_rng(55)
        kdc = Kdc(groups, rng)
        keys = driver_keygen(groups, kdc.gpk, "d", rng)
        cred = finalize_credential(groups, kdc.gpk, keys.a2, *kdc.register(keys.request()))
        with count_ops() as c:
            sig = randomized_sign(groups, cred, b"m", rng)
        assert c.exp == 3 and c.hash == 1
        assert c.pairing == 0
        assert c.mul == 2 and c.add == 1
        with count_ops() as c2:
            assert verify_sig(groups, kdc.gpk, sig, b"m")
        assert c2.pairing == 3 and c2.hash == 1

    def test_counts_independent_of_message_length(self):
        groups = make_backend("mock")
        rng = np.random.default_rng(56)
        kdc = Kdc(groups, rng)
        keys = driver_keygen(groups, kdc.gpk, "d", rng)
        cred = finalize_credential(groups, kdc.gpk, keys.a2, *kdc.register(keys.request()))
        with count_ops() as short:
            randomized_sign(groups, cred, b"", rng)
        with count_ops() as long:
            randomized_sign(groups, cred, b"x" * 4096, rng)
        assert short.as_dict() == long.as_dict()


class TestCertificates:
    def test_certify_and_verify(self):
        groups = make_backend("mock")
        rng = np.random.default_rng(60)
        kdc = Kdc(groups, rng)
        po_pub = rng.bytes(32)
        cert = kdc.certify_po(po_pub)
        assert cert.verify(kdc.cert_pubkey)
        assert Certificate.from_bytes(cert.to_bytes()) == cert

    def test_forged_certificate_rejected(self):
        groups = make_backend("mock")
        rng = np.random.default_rng(61)
        kdc = Kdc(groups, rng)
        cert = kdc.certify_po(rng.bytes(32))
        forged = Certificate(rng.bytes(32), cert.signature)
        assert not forged.verify(kdc.cert_pubkey)
        with pytest.raises(ValueError):
            Certificate.from_bytes(b"short")

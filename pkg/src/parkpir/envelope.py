"""Asymmetric envelopes and ordinary signatures used around the credentials.

Reservation requests carry Enc_PO(PK_D, t_s, t_p): an ephemeral-static
X25519 exchange feeds HKDF-SHA256, and ChaCha20-Poly1305 seals the 48-byte
plaintext (32-byte ephemeral verification key, start time, duration). A
fresh ephemeral key per message makes encryptions of equal plaintexts
differ, and the zero nonce is safe because each key encrypts exactly once.

Challenge-response at arrival and parking-owner transaction signing both use
Ed25519. All key generation draws seed bytes from the caller's RNG, so a
seeded scenario is bit-reproducible end to end.
"""

from __future__ import annotations

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    PublicFormat,
)


class EnvelopeError(Exception):
    """Authenticated decryption failed (wrong key or tampered ciphertext)."""


def _pub_bytes(key) -> bytes:
    return key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def ed25519_keypair(rng) -> tuple[Ed25519PrivateKey, bytes]:
    secret = Ed25519PrivateKey.from_private_bytes(rng.bytes(32))
    return secret, _pub_bytes(secret)


def ed25519_sign(secret: Ed25519PrivateKey, message: bytes) -> bytes:
    return secret.sign(message)


def ed25519_verify(pubkey: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(pubkey).verify(signature, message)
        return True
    except InvalidSignature:
        return False


def x25519_keypair(rng) -> tuple[X25519PrivateKey, bytes]:
    secret = X25519PrivateKey.from_private_bytes(rng.bytes(32))
    return secret, _pub_bytes(secret)


def _derive_key(shared: bytes, eph_pub: bytes, recipient_pub: bytes) -> bytes:
    return HKDF(
        algorithm=SHA256(),
        length=32,
        salt=None,
        info=b"parkpir-envelope" + eph_pub + recipient_pub,
    ).derive(shared)


def seal(recipient_pub: bytes, plaintext: bytes, rng) -> bytes:
    """Encrypt to an X25519 public key: ephemeral_pub(32) || AEAD ciphertext."""
    eph = X25519PrivateKey.from_private_bytes(rng.bytes(32))
    eph_pub = _pub_bytes(eph)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(recipient_pub))
    key = _derive_key(shared, eph_pub, recipient_pub)
    return eph_pub + ChaCha20Poly1305(key).encrypt(bytes(12), plaintext, None)


def open_sealed(recipient_secret: X25519PrivateKey, envelope: bytes) -> bytes:
    if len(envelope) < 32 + 16:
        raise EnvelopeError("envelope too short")
    eph_pub, ct = envelope[:32], envelope[32:]
    shared = recipient_secret.exchange(X25519PublicKey.from_public_bytes(eph_pub))
    key = _derive_key(shared, eph_pub, _pub_bytes(recipient_secret))
    try:
        return ChaCha20Poly1305(key).decrypt(bytes(12), ct, None)
    except InvalidTag as exc:
        raise EnvelopeError("authenticated decryption failed") from exc


RESERVATION_PLAINTEXT_LEN = 32 + 8 + 8


def pack_reservation(pk_d: bytes, t_start: int, t_park: int) -> bytes:
    """PK_D (32 bytes) || start epoch-seconds (u64) || duration seconds (u64)."""
    if len(pk_d) != 32:
        raise ValueError("PK_D must be a 32-byte verification key")
    return pk_d + t_start.to_bytes(8, "big") + t_park.to_bytes(8, "big")


def unpack_reservation(plaintext: bytes) -> tuple[bytes, int, int]:
    if len(plaintext) != RESERVATION_PLAINTEXT_LEN:
        raise ValueError("reservation plaintext must be 48 bytes")
    return (
        plaintext[:32],
        int.from_bytes(plaintext[32:40], "big"),
        int.from_bytes(plaintext[40:48], "big"),
    )

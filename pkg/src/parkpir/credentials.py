"""Anonymous credentials: KDC setup, driver registration, randomizable sigs.

The KDC holds a group secret (x, y) and publishes gpk = (g2, X = g2^x,
Y = g2^y). A driver with long-term key a1 (public A = g1^a1) picks a
credential secret a2 and submits gamma = g1^a2, gamma_tilde = Y^a2, an
ordinary Schnorr signature eta on gamma under a1, and a Schnorr proof of
knowledge of a2. After checking e(gamma, Y) = e(g1, gamma_tilde), eta, and
the proof, the KDC issues sigma1 = g1^k, sigma2 = (g1^x * gamma^y)^k and
records (id, gamma, eta, gamma_tilde) in its tracking list. The driver keeps
gsk = (a2, sigma1, sigma2, sigma3 = e(sigma1, Y)).

Each showing re-randomizes: sig1 = sigma1^r1, sig2 = sigma2^r1,
sig3 = sigma3^(r1*r2), c = H(sig1, sig2, sig3, msg), s = r2 + c*a2. The
verifier recomputes V = e(sig1, X)^c * e(sig2, g2)^(-c) * e(sig1, Y)^s,
which equals sig3 for honest tuples, and checks the hash. Repeated showings
carry fresh exponents, so they are pairwise unlinkable tuples.

The KDC also certifies parking-owner keys (plain Ed25519 certificates) for
ledger admission.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import envelope
from .pairing import zp_add, zp_mul


class RegistrationError(Exception):
    """Driver registration rejected by the KDC."""


def rand_scalar(rng, order: int) -> int:
    """Uniform nonzero scalar; extra bytes make modulo bias negligible."""
    width = (order.bit_length() + 64) // 8
    while True:
        v = int.from_bytes(rng.bytes(width), "big") % order
        if v:
            return v


def _scalar_bytes(value: int, order: int) -> bytes:
    return value.to_bytes((order.bit_length() + 7) // 8, "big")


@dataclass(frozen=True)
class GroupPublicKey:
    """gpk = (g2, X = g2^x, Y = g2^y)."""

    g2: object
    x_tilde: object
    y_tilde: object

    def to_bytes(self) -> bytes:
        return b"".join(
            p.to_bytes() for p in (self.g2, self.x_tilde, self.y_tilde)
        )


@dataclass(frozen=True)
class SchnorrSig:
    """Fiat-Shamir Schnorr tuple (c, s) over G1; doubles as a dlog PoK."""

    c: int
    s: int


def schnorr_sign(groups, secret: int, public, message: bytes, tag: bytes) -> SchnorrSig:
    # deterministic nonce derived from the secret and message
    w = groups.hash_to_scalar(
        tag + b"/nonce", _scalar_bytes(secret, groups.order), message
    )
    commit = groups.g1 ** w
    c = groups.hash_to_scalar(tag, public.to_bytes(), commit.to_bytes(), message)
    s = (w + c * secret) % groups.order
    return SchnorrSig(c, s)


def schnorr_verify(groups, public, message: bytes, sig: SchnorrSig, tag: bytes) -> bool:
    commit = (groups.g1 ** sig.s) * (public ** (-sig.c))
    c = groups.hash_to_scalar(tag, public.to_bytes(), commit.to_bytes(), message)
    return c == sig.c


@dataclass(frozen=True)
class RegistrationRequest:
    driver_id: str
    a_pub: object
    gamma: object
    gamma_tilde: object
    eta: SchnorrSig
    pok_a2: SchnorrSig


@dataclass(frozen=True)
class DriverKeys:
    """Driver-side key material; only the request leaves the driver."""

    driver_id: str
    a1: int
    a_pub: object
    a2: int
    gamma: object
    gamma_tilde: object
    eta: SchnorrSig
    pok_a2: SchnorrSig

    def request(self) -> RegistrationRequest:
        return RegistrationRequest(
            self.driver_id, self.a_pub, self.gamma, self.gamma_tilde,
            self.eta, self.pok_a2,
        )


def driver_keygen(groups, gpk: GroupPublicKey, driver_id: str, rng) -> DriverKeys:
    a1 = rand_scalar(rng, groups.order)
    a2 = rand_scalar(rng, groups.order)
    a_pub = groups.g1 ** a1
    gamma = groups.g1 ** a2
    gamma_tilde = gpk.y_tilde ** a2
    eta = schnorr_sign(groups, a1, a_pub, gamma.to_bytes(), tag=b"eta")
    pok = schnorr_sign(groups, a2, gamma, gpk.to_bytes(), tag=b"pok-a2")
    return DriverKeys(driver_id, a1, a_pub, a2, gamma, gamma_tilde, eta, pok)


@dataclass(frozen=True)
class DriverCredential:
    """gsk_D = (a2, sigma1, sigma2, sigma3)."""

    a2: int
    sigma1: object
    sigma2: object
    sigma3: object


def credential_valid(groups, gpk: GroupPublicKey, cred: DriverCredential) -> bool:
    lhs = groups.pair(cred.sigma1, gpk.x_tilde * (gpk.y_tilde ** cred.a2))
    rhs = groups.pair(cred.sigma2, gpk.g2)
    return lhs == rhs and cred.sigma3 == groups.pair(cred.sigma1, gpk.y_tilde)


def finalize_credential(groups, gpk: GroupPublicKey, a2: int, sigma1, sigma2) -> DriverCredential:
    cred = DriverCredential(a2, sigma1, sigma2, groups.pair(sigma1, gpk.y_tilde))
    if not credential_valid(groups, gpk, cred):
        raise RegistrationError("issued credential fails the validity pairing check")
    return cred


class Kdc:
    """Key distribution center: group keys, tracking list, PO certification."""

    def __init__(self, groups, rng):
        self.groups = groups
        self._rng = rng
        self._x = rand_scalar(rng, groups.order)
        self._y = rand_scalar(rng, groups.order)
        self.gpk = GroupPublicKey(
            groups.g2, groups.g2 ** self._x, groups.g2 ** self._y
        )
        self.tracking_list: dict[str, tuple] = {}
        self._cert_key, self.cert_pubkey = envelope.ed25519_keypair(rng)

    def register(self, req: RegistrationRequest):
        """Validate a registration request and issue (sigma1, sigma2)."""
        if req.driver_id in self.tracking_list:
            raise RegistrationError(f"driver {req.driver_id!r} already registered")
        g = self.groups
        if g.pair(req.gamma, self.gpk.y_tilde) != g.pair(g.g1, req.gamma_tilde):
            raise RegistrationError("gamma_tilde pairing check failed")
        if not schnorr_verify(g, req.a_pub, req.gamma.to_bytes(), req.eta, tag=b"eta"):
            raise RegistrationError("eta signature under A failed")
        if not schnorr_verify(g, req.gamma, self.gpk.to_bytes(), req.pok_a2, tag=b"pok-a2"):
            raise RegistrationError("proof of knowledge of a2 failed")
        k = rand_scalar(self._rng, g.order)
        sigma1 = g.g1 ** k
        sigma2 = ((g.g1 ** self._x) * (req.gamma ** self._y)) ** k
        self.tracking_list[req.driver_id] = (
            req.gamma, req.eta, req.gamma_tilde
        )
        return sigma1, sigma2

    def certify_po(self, po_pubkey: bytes) -> "Certificate":
        sig = envelope.ed25519_sign(self._cert_key, b"parkpir-po-cert" + po_pubkey)
        return Certificate(po_pubkey, sig)


@dataclass(frozen=True)
class Certificate:
    """KDC attestation that a parking-owner key is authorized."""

    subject: bytes
    signature: bytes

    def verify(self, kdc_pubkey: bytes) -> bool:
        return envelope.ed25519_verify(
            kdc_pubkey, b"parkpir-po-cert" + self.subject, self.signature
        )

    def to_bytes(self) -> bytes:
        return self.subject + self.signature

    @classmethod
    def from_bytes(cls, data: bytes) -> "Certificate":
        if len(data) != 96:
            raise ValueError("certificate must be 32-byte subject + 64-byte signature")
        return cls(data[:32], data[32:])


@dataclass(frozen=True)
class RandomizedSig:
    """One unlinkable credential showing: (sig1, sig2, c, s)."""

    sig1: object
    sig2: object
    c: int
    s: int

    def to_bytes(self, order: int) -> bytes:
        parts = [
            self.sig1.to_bytes(),
            self.sig2.to_bytes(),
            _scalar_bytes(self.c, order),
            _scalar_bytes(self.s, order),
        ]
        return b"".join(len(p).to_bytes(2, "big") + p for p in parts)


def randomized_sign(groups, cred: DriverCredential, message: bytes, rng) -> RandomizedSig:
    order = groups.order
    r1 = rand_scalar(rng, order)
    r2 = rand_scalar(rng, order)
    sig1 = cred.sigma1 ** r1
    sig2 = cred.sigma2 ** r1
    sig3 = cred.sigma3 ** zp_mul(r1, r2, order)
    c = groups.hash_to_scalar(
        b"show", sig1.to_bytes(), sig2.to_bytes(), sig3.to_bytes(), message
    )
    s = zp_add(r2, zp_mul(c, cred.a2, order), order)
    return RandomizedSig(sig1, sig2, c, s)


def verify_sig(groups, gpk: GroupPublicKey, sig: RandomizedSig, message: bytes) -> bool:
    if sig.sig1.is_identity:
        return False
    v = (
        (groups.pair(sig.sig1, gpk.x_tilde) ** sig.c)
        * (groups.pair(sig.sig2, gpk.g2) ** (-sig.c))
        * (groups.pair(sig.sig1, gpk.y_tilde) ** sig.s)
    )
    c = groups.hash_to_scalar(
        b"show", sig.sig1.to_bytes(), sig.sig2.to_bytes(), v.to_bytes(), message
    )
    return c == sig.c

"""Bilinear-group backends and cryptographic operation counting.

Two interchangeable backends expose the same contract (prime order, g1, g2,
pair, hash_to_scalar):

* ``MockPairing`` tracks only generator exponents, so e(g1^a, g2^b) = gT^(ab)
  by construction. It is transparent (anyone can read exponents) and exists
  purely to exercise protocol logic exhaustively and fast.
* ``CurvePairing`` is an algebraically genuine reduced Tate pairing on the
  supersingular curve y^2 = x^3 + x over GF(q), q = 3 (mod 4), using the
  distortion map (x, y) -> (-x, iy) into GF(q^2) and final exponentiation
  by (q^2-1)/rho. The fixed 67-bit q makes every operation exact and quick;
  the parameter sizes are far below any security level, which is fine for a
  desk-scale protocol study and stated loudly here.

Group operations tick an ambient OpCounter stack (see count_ops), giving the
per-phase Exp/Mul/Add/Hash/Pairing tallies the overhead reports quote.
"""

from __future__ import annotations

import hashlib
from contextlib import contextmanager
from dataclasses import asdict, dataclass

from .field import is_prime

# Mersenne prime 2^127 - 1: scalar field of the mock backend.
MOCK_ORDER = (1 << 127) - 1

# Supersingular curve constants: rho prime, q = h*rho - 1 prime, q = 3 mod 4,
# base point of order rho obtained by clearing the cofactor h.
CURVE_RHO = 9223372036854775837
CURVE_H = 12
CURVE_Q = 110680464442257310043
CURVE_GX = 55418973231519653161
CURVE_GY = 95952661321025906795


@dataclass
class OpCounter:
    """Tally of group exponentiations, group/scalar muls, scalar adds,
    hash-to-scalar calls, and pairings."""

    exp: int = 0
    mul: int = 0
    add: int = 0
    hash: int = 0
    pairing: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


_ACTIVE: list[OpCounter] = []


@contextmanager
def count_ops():
    """Collect operation counts for everything executed in the block."""
    counter = OpCounter()
    _ACTIVE.append(counter)
    try:
        yield counter
    finally:
        _ACTIVE.remove(counter)


def _tick(kind: str) -> None:
    for counter in _ACTIVE:
        setattr(counter, kind, getattr(counter, kind) + 1)


def zp_add(a: int, b: int, order: int) -> int:
    _tick("add")
    return (a + b) % order


def zp_mul(a: int, b: int, order: int) -> int:
    _tick("mul")
    return a * b % order


@dataclass(frozen=True)
class MockElement:
    """Group element tracked as an exponent of the group generator."""

    group: str
    power: int
    order: int

    def __mul__(self, other: "MockElement") -> "MockElement":
        if not isinstance(other, MockElement) or other.group != self.group:
            return NotImplemented
        _tick("mul")
        return MockElement(self.group, (self.power + other.power) % self.order, self.order)

    def __pow__(self, k: int) -> "MockElement":
        _tick("exp")
        return MockElement(self.group, self.power * k % self.order, self.order)

    @property
    def is_identity(self) -> bool:
        return self.power == 0

    def to_bytes(self) -> bytes:
        return self.group.encode() + b":" + self.power.to_bytes(16, "big")


class MockPairing:
    """Exponent-arithmetic bilinear groups of prime order 2^127 - 1."""

    name = "mock"

    def __init__(self, order: int = MOCK_ORDER):
        if not is_prime(order):
            raise ValueError("group order must be prime")
        self.order = order
        self.g1 = MockElement("G1", 1, order)
        self.g2 = MockElement("G2", 1, order)
        self.gt_one = MockElement("GT", 0, order)

    def pair(self, a: MockElement, b: MockElement) -> MockElement:
        if a.group != "G1" or b.group != "G2":
            raise TypeError("pairing expects (G1, G2) arguments")
        _tick("pairing")
        return MockElement("GT", a.power * b.power % self.order, self.order)

    def hash_to_scalar(self, *parts: bytes) -> int:
        return _digest_to_scalar(self.order, parts)


def _digest_to_scalar(order: int, parts) -> int:
    _tick("hash")
    h = hashlib.sha256()
    for part in parts:
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return int.from_bytes(h.digest(), "big") % order


def _f2_mul(u, v, q):
    a, b = u
    c, d = v
    return ((a * c - b * d) % q, (a * d + b * c) % q)


def _f2_pow(u, e, q):
    r = (1, 0)
    while e:
        if e & 1:
            r = _f2_mul(r, u, q)
        u = _f2_mul(u, u, q)
        e >>= 1
    return r


def _ec_add(p1, p2, q):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2 and (y1 + y2) % q == 0:
        return None
    if p1 == p2:
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (lam * lam - x1 - x2) % q
    y3 = (lam * (x1 - x3) - y1) % q
    return (x3, y3)


def _ec_mul(point, k, q):
    acc = None
    while k:
        if k & 1:
            acc = _ec_add(acc, point, q)
        point = _ec_add(point, point, q)
        k >>= 1
    return acc


def _line_at_distorted(t, u, qx, qy, q):
    """Line through t,u evaluated at the distorted point (-qx... already
    negated by the caller) with imaginary y; verticals return 1 because the
    final exponentiation kills GF(q) values anyway."""
    x1, y1 = t
    x2, y2 = u
    if x1 == x2 and (y1 + y2) % q == 0:
        return (1, 0)
    if t == u:
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    return ((-y1 - lam * (qx - x1)) % q, qy % q)


@dataclass(frozen=True)
class CurveElement:
    """Point of order dividing rho on y^2 = x^3 + x, multiplicative notation."""

    xy: tuple[int, int] | None
    q: int
    rho: int

    def __mul__(self, other: "CurveElement") -> "CurveElement":
        if not isinstance(other, CurveElement):
            return NotImplemented
        _tick("mul")
        return CurveElement(_ec_add(self.xy, other.xy, self.q), self.q, self.rho)

    def __pow__(self, k: int) -> "CurveElement":
        _tick("exp")
        return CurveElement(_ec_mul(self.xy, k % self.rho, self.q), self.q, self.rho)

    @property
    def is_identity(self) -> bool:
        return self.xy is None

    def to_bytes(self) -> bytes:
        width = (self.q.bit_length() + 7) // 8
        if self.xy is None:
            return b"\x00" + bytes(2 * width)
        return b"\x04" + self.xy[0].to_bytes(width, "big") + self.xy[1].to_bytes(width, "big")


@dataclass(frozen=True)
class CurveGtElement:
    """Order-rho element of GF(q^2)*, the Tate pairing target group."""

    value: tuple[int, int]
    q: int
    rho: int

    def __mul__(self, other: "CurveGtElement") -> "CurveGtElement":
        if not isinstance(other, CurveGtElement):
            return NotImplemented
        _tick("mul")
        return CurveGtElement(_f2_mul(self.value, other.value, self.q), self.q, self.rho)

    def __pow__(self, k: int) -> "CurveGtElement":
        _tick("exp")
        return CurveGtElement(_f2_pow(self.value, k % self.rho, self.q), self.q, self.rho)

    @property
    def is_identity(self) -> bool:
        return self.value == (1, 0)

    def to_bytes(self) -> bytes:
        width = (self.q.bit_length() + 7) // 8
        return self.value[0].to_bytes(width, "big") + self.value[1].to_bytes(width, "big")


class CurvePairing:
    """Reduced Tate pairing on a small supersingular curve (NOT secure sizes)."""

    name = "curve"

    def __init__(self):
        q, rho, h = CURVE_Q, CURVE_RHO, CURVE_H
        if not (is_prime(q) and is_prime(rho) and q + 1 == h * rho and q % 4 == 3):
            raise ValueError("inconsistent curve constants")
        self.q = q
        self.order = rho
        base = (CURVE_GX, CURVE_GY)
        if (base[1] ** 2 - base[0] ** 3 - base[0]) % q != 0:
            raise ValueError("base point not on curve")
        if _ec_mul(base, rho, q) is not None:
            raise ValueError("base point order is not rho")
        self.g1 = CurveElement(base, q, rho)
        self.g2 = CurveElement(base, q, rho)
        self.gt_one = CurveGtElement((1, 0), q, rho)
        if self.pair(self.g1, self.g2).is_identity:
            raise ValueError("degenerate pairing")

    def pair(self, a: CurveElement, b: CurveElement) -> CurveGtElement:
        _tick("pairing")
        q, rho = self.q, self.order
        if a.xy is None or b.xy is None:
            return CurveGtElement((1, 0), q, rho)
        qx, qy = (-b.xy[0]) % q, b.xy[1]
        f = (1, 0)
        t = a.xy
        for bit in bin(rho)[3:]:
            f = _f2_mul(_f2_mul(f, f, q), _line_at_distorted(t, t, qx, qy, q), q)
            t = _ec_add(t, t, q)
            if bit == "1":
                f = _f2_mul(f, _line_at_distorted(t, a.xy, qx, qy, q), q)
                t = _ec_add(t, a.xy, q)
        return CurveGtElement(_f2_pow(f, (q * q - 1) // rho, q), q, rho)

    def hash_to_scalar(self, *parts: bytes) -> int:
        return _digest_to_scalar(self.order, parts)


def make_backend(name: str):
    if name == "mock":
        return MockPairing()
    if name == "curve":
        return CurvePairing()
    raise ValueError(f"unknown pairing backend {name!r} (expected mock or curve)")

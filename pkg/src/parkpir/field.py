"""Prime-field arithmetic and polynomials over GF(p).

Symbols carry two payload bytes each, so the default modulus is the Fermat
prime 65537: every 16-bit payload value embeds as a field element, and the
modulus comfortably exceeds any desk-scale node count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_MODULUS = 65537

# Deterministic Miller-Rabin witness set, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n % w == 0:
            return n == w
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class _Erased:
    """Marker for an erased codeword position (e.g. an unresponsive source).

    Deliberately not a field value: erasures are never confused with symbols.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ERASED"


ERASED = _Erased()


class PrimeField:
    """GF(p) for prime p; elements are plain ints in [0, p)."""

    __slots__ = ("p",)

    def __init__(self, p: int = DEFAULT_MODULUS):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p

    def element(self, value: int) -> int:
        return value % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("zero has no inverse in GF(p)")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)

    def rand(self, rng) -> int:
        """Uniform element from a numpy Generator."""
        return int(rng.integers(self.p))

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


@dataclass(frozen=True)
class Poly:
    """Polynomial over a prime field, coefficients lowest-degree first.

    Trailing zero coefficients are stripped at construction; the zero
    polynomial has empty coeffs and degree -1.
    """

    field: PrimeField
    coeffs: tuple[int, ...]

    @classmethod
    def make(cls, field: PrimeField, coeffs: Iterable[int]) -> "Poly":
        cs = [c % field.p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(field, tuple(cs))

    @classmethod
    def zero(cls, field: PrimeField) -> "Poly":
        return cls(field, ())

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, z: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * z + c) % self.field.p
        return acc

    def __add__(self, other: "Poly") -> "Poly":
        p = self.field.p
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % p
        return Poly.make(self.field, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.coeffs or not other.coeffs:
            return Poly.zero(self.field)
        p = self.field.p
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = (out[i + j] + a * b) % p
        return Poly.make(self.field, out)

    def scale(self, k: int) -> "Poly":
        p = self.field.p
        return Poly.make(self.field, [c * k % p for c in self.coeffs])


def poly_eval(f: Poly, z: int) -> int:
    return f.eval(z)


def poly_interpolate(field: PrimeField, points: Sequence[tuple[int, int]]) -> Poly:
    """Unique polynomial of degree < len(points) through the given points (Lagrange)."""
    xs = [x % field.p for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation points must have distinct x-coordinates")
    p = field.p
    result = [0] * len(points)
    for i, (xi, yi) in enumerate(points):
        # numerator polynomial prod_{j != i} (z - x_j), scaled by yi / prod (xi - x_j)
        basis = [1]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            nxt = [0] * (len(basis) + 1)
            for d, c in enumerate(basis):
                nxt[d] = (nxt[d] - c * xj) % p
                nxt[d + 1] = (nxt[d + 1] + c) % p
            basis = nxt
            denom = denom * (xi - xj) % p
        scale = yi % p * pow(denom, p - 2, p) % p
        for d, c in enumerate(basis):
            result[d] = (result[d] + c * scale) % p
    return Poly.make(field, result)


@dataclass(frozen=True)
class EvalPoints:
    """The n distinct nonzero evaluation points, one per node index."""

    field: PrimeField
    alphas: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.alphas)) != len(self.alphas):
            raise ValueError("evaluation points must be distinct")
        if any(a % self.field.p == 0 for a in self.alphas):
            raise ValueError("evaluation points must be nonzero")

    @classmethod
    def default(cls, field: PrimeField, n: int) -> "EvalPoints":
        if n >= field.p:
            raise ValueError("need p > n for distinct nonzero points")
        return cls(field, tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.alphas)


def symbols_to_bytes(symbols: Iterable[int]) -> bytes:
    """Pack payload symbols (values < 2**16) as 2-byte big-endian each."""
    out = bytearray()
    for s in symbols:
        s = int(s)
        if not 0 <= s < 1 << 16:
            raise ValueError(f"symbol {s} does not fit two payload bytes")
        out += s.to_bytes(2, "big")
    return bytes(out)


def bytes_to_symbols(data: bytes) -> list[int]:
    if len(data) % 2:
        raise ValueError("payload length must be even")
    return [int.from_bytes(data[i : i + 2], "big") for i in range(0, len(data), 2)]

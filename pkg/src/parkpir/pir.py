"""Multi-server private retrieval over replicated cell ledgers.

A driver who wants cell d of M sends node j a query vector whose (m, l)
entry is beta_l^m(alpha_j), plus the deterministic term alpha_j^(k-l) exactly
when m = d, where k = n - 2b - r and each beta is a uniformly random
polynomial of degree <= t-1. Any t nodes therefore see a Shamir sharing that
is independent of d. Each node returns the inner product of its query with
the flattened cell content, coordinate-wise over the S symbol positions of a
row. Across nodes the responses per symbol position are evaluations of a
polynomial of degree <= k-1, i.e. a codeword of an [n, k] Reed-Solomon code,
so up to b corrupted and r missing responses are tolerated. The desired
row symbols sit isolated in coefficients k-1 down to t of the decoded
polynomial: the random beta contributions live strictly below degree t, so no
explicit interference subtraction is needed.

Wire note: elements serialize as two big-endian payload bytes. The modulus
65537 admits one value (65536) that two bytes cannot carry, so framed
messages prepend a fixed-size overflow bitmask marking those positions; the
masked positions store zero. Payload accounting everywhere counts two bytes
per symbol and ignores framing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .field import ERASED, EvalPoints, Poly, PrimeField
from .rscode import DecodeFailure, decode_rows

_MAX_WIRE_MODULUS = (1 << 16) + 1


@dataclass(frozen=True)
class PirParams:
    """Retrieval parameters: n nodes, t-collusion, b byzantine, r silent.

    M is the cell count and S the symbols per row (20 for 40-byte offers).
    The stripe height L and response-code dimension k are derived.
    """

    n: int
    t: int = 1
    b: int = 0
    r: int = 0
    M: int = 1
    S: int = 20
    field: PrimeField = dc_field(default_factory=PrimeField)

    def __post_init__(self):
        if self.t < 1 or self.b < 0 or self.r < 0:
            raise ValueError("need t >= 1, b >= 0, r >= 0")
        if self.n <= self.t + 2 * self.b + self.r:
            raise ValueError("need n > t + 2b + r so at least one row fits per stripe")
        if self.M < 1 or self.S < 1:
            raise ValueError("need M >= 1 and S >= 1")
        if self.field.p <= max(self.n, 1 << 16):
            raise ValueError("field must exceed both the node count and 2^16")

    @property
    def L(self) -> int:
        """Rows retrieved per stripe."""
        return self.n - self.t - 2 * self.b - self.r

    @property
    def k(self) -> int:
        """Dimension of the [n, k] response code."""
        return self.n - 2 * self.b - self.r

    @property
    def points(self) -> EvalPoints:
        return EvalPoints.default(self.field, self.n)

    def stripes(self, capacity: int) -> int:
        return max(1, math.ceil(capacity / self.L))


@dataclass(frozen=True)
class PirQuery:
    """One node's query vector: M*L elements, row index fastest within cell."""

    field: PrimeField
    node_index: int
    stripe_index: int
    entries: tuple[int, ...]

    def to_bytes(self) -> bytes:
        head = self.node_index.to_bytes(2, "big") + self.stripe_index.to_bytes(2, "big")
        return head + _pack_masked(self.entries, self.field.p)

    @classmethod
    def from_bytes(cls, data: bytes, field: PrimeField, count: int) -> "PirQuery":
        node = int.from_bytes(data[0:2], "big")
        stripe = int.from_bytes(data[2:4], "big")
        values = _unpack_masked(data[4:], count, field.p)
        return cls(field, node, stripe, tuple(values))

    @property
    def payload_bytes(self) -> int:
        return 2 * len(self.entries)


@dataclass(frozen=True)
class QueryRandomness:
    """The M*L masking polynomials, each of degree <= t-1, query ordering."""

    betas: tuple[Poly, ...]


@dataclass(frozen=True)
class PirResponse:
    """One node's answer for a stripe: S symbols, or a timeout marker."""

    field: PrimeField
    node_index: int
    stripe_index: int
    values: tuple[int, ...] | None

    @classmethod
    def timeout(
        cls, field: PrimeField, node_index: int, stripe_index: int
    ) -> "PirResponse":
        return cls(field, node_index, stripe_index, None)

    @property
    def responsive(self) -> bool:
        return self.values is not None

    def to_bytes(self) -> bytes:
        head = self.node_index.to_bytes(2, "big") + self.stripe_index.to_bytes(2, "big")
        if self.values is None:
            return head + b"\x01"
        return head + b"\x00" + _pack_masked(self.values, self.field.p)

    @classmethod
    def from_bytes(cls, data: bytes, field: PrimeField, count: int) -> "PirResponse":
        node = int.from_bytes(data[0:2], "big")
        stripe = int.from_bytes(data[2:4], "big")
        if data[4] == 1:
            return cls.timeout(field, node, stripe)
        values = _unpack_masked(data[5:], count, field.p)
        return cls(field, node, stripe, tuple(values))

    @property
    def payload_bytes(self) -> int:
        return 0 if self.values is None else 2 * len(self.values)


def _pack_masked(values: Sequence[int], p: int) -> bytes:
    if p > _MAX_WIRE_MODULUS:
        raise ValueError("wire format carries 2-byte symbols; modulus too large")
    mask = bytearray((len(values) + 7) // 8)
    body = bytearray()
    for i, v in enumerate(values):
        v = int(v)
        if v == 1 << 16:
            mask[i // 8] |= 1 << (i % 8)
            v = 0
        body += v.to_bytes(2, "big")
    return bytes(mask) + bytes(body)


def _unpack_masked(data: bytes, count: int, p: int) -> list[int]:
    mlen = (count + 7) // 8
    mask, body = data[:mlen], data[mlen : mlen + 2 * count]
    if len(body) != 2 * count:
        raise ValueError("truncated element payload")
    out = []
    for i in range(count):
        v = int.from_bytes(body[2 * i : 2 * i + 2], "big")
        if mask[i // 8] >> (i % 8) & 1:
            v = 1 << 16
        out.append(v % p)
    return out


def make_queries(
    params: PirParams,
    desired_cell: int,
    rng,
    stripe_index: int = 0,
) -> tuple[list[PirQuery], QueryRandomness]:
    """Fresh query vectors for all n nodes targeting ``desired_cell`` (1-based)."""
    if not 1 <= desired_cell <= params.M:
        raise ValueError(f"desired cell must be in 1..{params.M}")
    rng = np.random.default_rng(rng)
    p = params.field.p
    ml = params.M * params.L
    beta = rng.integers(0, p, size=(ml, params.t), dtype=np.int64)

    alphas = np.array(params.points.alphas, dtype=np.int64)
    powers = np.ones((params.n, params.k), dtype=np.int64)
    for e in range(1, params.k):
        powers[:, e] = powers[:, e - 1] * alphas % p

    entries = powers[:, : params.t] @ beta.T % p
    base = (desired_cell - 1) * params.L
    for ell in range(1, params.L + 1):
        entries[:, base + ell - 1] = (
            entries[:, base + ell - 1] + powers[:, params.k - ell]
        ) % p

    queries = [
        PirQuery(params.field, j + 1, stripe_index, tuple(int(v) for v in entries[j]))
        for j in range(params.n)
    ]
    betas = tuple(Poly.make(params.field, beta[i].tolist()) for i in range(ml))
    return queries, QueryRandomness(betas)


def answer_query(query: PirQuery, content) -> PirResponse:
    """Inner product of the query with the node's flattened stripe content.

    ``content`` is (M*L, S): cell-major rows matching the query ordering.
    """
    arr = np.asarray(content, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != len(query.entries):
        raise ValueError("content shape must be (M*L, S) matching the query")
    q = np.array(query.entries, dtype=np.int64)
    vals = (q % query.field.p) @ (arr % query.field.p) % query.field.p
    return PirResponse(
        query.field,
        query.node_index,
        query.stripe_index,
        tuple(int(v) for v in vals),
    )


def reconstruct(responses: Sequence[PirResponse], params: PirParams) -> np.ndarray:
    """Decode the desired stripe: (L, S) symbol rows.

    Timeouts become erasures at known positions; up to b corrupted responses
    are corrected by the [n, k] response code. The row-l symbols are read off
    coefficient k-l of each decoded polynomial; the masking contribution
    never reaches those positions, so nothing is subtracted.
    """
    seen: dict[int, PirResponse] = {}
    for resp in responses:
        if not 1 <= resp.node_index <= params.n:
            raise ValueError(f"node index {resp.node_index} out of range")
        if resp.node_index in seen:
            raise ValueError(f"duplicate response from node {resp.node_index}")
        if resp.responsive and len(resp.values) != params.S:
            raise ValueError("response width must equal S")
        seen[resp.node_index] = resp

    words = np.full((params.S, params.n), -1, dtype=np.int64)
    for j in range(1, params.n + 1):
        resp = seen.get(j)
        if resp is not None and resp.responsive:
            words[:, j - 1] = resp.values
    coeffs, ok = decode_rows(
        words, params.points.alphas, params.k, params.b, params.field.p
    )
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise DecodeFailure(
            f"symbol position {bad}: fault budget exceeded (b={params.b}, r={params.r})"
        )
    rows = np.empty((params.L, params.S), dtype=np.int64)
    for ell in range(1, params.L + 1):
        rows[ell - 1] = coeffs[:, params.k - ell]
    return rows


def stripe_content(cells: np.ndarray, stripe_index: int, params: PirParams) -> np.ndarray:
    """Slice a node's ledger copy (M, capacity, S) into stripe rows (M*L, S).

    Rows beyond the cell capacity are zero (padding keeps response shapes,
    and therefore anything observable, independent of the requested cell).
    """
    cells = np.asarray(cells, dtype=np.int64)
    if cells.ndim != 3 or cells.shape[0] != params.M or cells.shape[2] != params.S:
        raise ValueError("cells must be (M, capacity, S)")
    capacity = cells.shape[1]
    out = np.zeros((params.M * params.L, params.S), dtype=np.int64)
    lo = stripe_index * params.L
    hi = min(capacity, lo + params.L)
    if lo < hi:
        for m in range(params.M):
            out[m * params.L : m * params.L + (hi - lo)] = cells[m, lo:hi]
    return out


def make_answerer(cells: np.ndarray, params: PirParams) -> Callable[[PirQuery], PirResponse]:
    """An honest node: answers each query against its own ledger copy."""

    def answer(query: PirQuery) -> PirResponse:
        return answer_query(query, stripe_content(cells, query.stripe_index, params))

    return answer


def retrieve_cell(
    answerers: Sequence[Callable[[PirQuery], PirResponse]],
    params: PirParams,
    desired_cell: int,
    capacity: int,
    rng,
) -> list[tuple[int, ...]]:
    """Full retrieval of one cell: one round per stripe, fresh coins each.

    Returns the non-padding rows (a row of all zeros is padding by the
    ledger's construction).
    """
    if len(answerers) != params.n:
        raise ValueError("need exactly one answerer per node")
    rng = np.random.default_rng(rng)
    collected: list[np.ndarray] = []
    for s in range(params.stripes(capacity)):
        queries, _ = make_queries(params, desired_cell, rng, stripe_index=s)
        responses = [ans(q) for ans, q in zip(answerers, queries)]
        collected.append(reconstruct(responses, params))
    stacked = np.concatenate(collected, axis=0)[:capacity]
    return [tuple(int(v) for v in row) for row in stacked if row.any()]


def retrieval_rate(params: PirParams) -> Fraction:
    """Desired symbols over downloaded symbols per stripe."""
    return Fraction(params.n - params.t - 2 * params.b - params.r, params.n - params.r)

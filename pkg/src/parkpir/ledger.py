"""Replicated cell ledger: signed offer transactions, blocks, and a
fixed-leader majority-ack commit protocol.

Node 1 is the permanent leader. A submitted transaction is validated by the
leader (owner certificate, signature, cell bounds, capacity or ownership),
wrapped in a block extending the chain, and proposed to every node. Each
responsive node re-validates independently and acknowledges; the leader
commits once a strict majority has acknowledged, at which point all
responsive nodes apply the block. Without a quorum the transaction stays
pending for retry. Nodes that were offline catch up by replaying the
leader's chain, so honest replicas are byte-identical at equal heights.

Ledger content is an (M, capacity, S) symbol array per node: one row per
offer, zero rows as padding. Publishing fills the first free row of the
target cell; invalidation zeroes a row owned by the requesting owner. Both
are deterministic functions of the replicated state, so replicas never
diverge.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional

import numpy as np

from .credentials import Certificate
from .envelope import ed25519_sign, ed25519_verify
from .field import DEFAULT_MODULUS, symbols_to_bytes
from .offers import OFFER_SYMBOLS, ParkingOffer, po_fingerprint

LEDGER_MAGIC = b"PKPR\x01"


class TxKind(IntEnum):
    PUBLISH = 1
    INVALIDATE = 2


@dataclass(frozen=True)
class OfferId:
    """Ledger identity of a committed offer: owner, cell, row at commit."""

    po_id: bytes
    cell: int
    row: int

    def to_bytes(self) -> bytes:
        return self.po_id + self.cell.to_bytes(2, "big") + self.row.to_bytes(2, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "OfferId":
        if len(data) != 24:
            raise ValueError("offer id must be 24 bytes")
        return cls(data[:20], int.from_bytes(data[20:22], "big"), int.from_bytes(data[22:24], "big"))


@dataclass(frozen=True)
class OfferTx:
    kind: TxKind
    offer: Optional[ParkingOffer]
    target: Optional[OfferId]
    po_pubkey: bytes
    certificate: Certificate
    signature: bytes

    def _body(self) -> bytes:
        if self.kind == TxKind.PUBLISH:
            return self.offer.serialize()
        return self.target.to_bytes()

    def signed_payload(self) -> bytes:
        return b"parkpir-tx" + bytes([self.kind]) + self._body()

    def to_bytes(self) -> bytes:
        return (
            bytes([self.kind])
            + self._body()
            + self.po_pubkey
            + self.certificate.to_bytes()
            + self.signature
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "OfferTx":
        kind = TxKind(data[0])
        body_len = 40 if kind == TxKind.PUBLISH else 24
        body = data[1 : 1 + body_len]
        rest = data[1 + body_len :]
        if len(rest) != 32 + 96 + 64:
            raise ValueError("truncated transaction")
        offer = ParkingOffer.deserialize(body) if kind == TxKind.PUBLISH else None
        target = OfferId.from_bytes(body) if kind == TxKind.INVALIDATE else None
        return cls(
            kind, offer, target, rest[:32],
            Certificate.from_bytes(rest[32:128]), rest[128:192],
        )


def make_publish_tx(offer: ParkingOffer, po_secret, po_pubkey: bytes,
                    certificate: Certificate) -> OfferTx:
    tx = OfferTx(TxKind.PUBLISH, offer, None, po_pubkey, certificate, b"")
    return OfferTx(
        TxKind.PUBLISH, offer, None, po_pubkey, certificate,
        ed25519_sign(po_secret, tx.signed_payload()),
    )


def make_invalidate_tx(target: OfferId, po_secret, po_pubkey: bytes,
                       certificate: Certificate) -> OfferTx:
    tx = OfferTx(TxKind.INVALIDATE, None, target, po_pubkey, certificate, b"")
    return OfferTx(
        TxKind.INVALIDATE, None, target, po_pubkey, certificate,
        ed25519_sign(po_secret, tx.signed_payload()),
    )


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: bytes
    timestamp: int
    leader_id: int
    txs: tuple[OfferTx, ...]

    def to_bytes(self) -> bytes:
        head = (
            self.height.to_bytes(4, "big")
            + self.prev_hash
            + self.timestamp.to_bytes(8, "big")
            + self.leader_id.to_bytes(2, "big")
            + len(self.txs).to_bytes(2, "big")
        )
        return head + b"".join(tx.to_bytes() for tx in self.txs)

    @property
    def hash(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()


@dataclass(frozen=True)
class AdmissionResult:
    committed: bool
    error: Optional[str] = None
    height: Optional[int] = None
    offer_id: Optional[OfferId] = None


class LedgerNode:
    """One consortium replica: chain of blocks plus the materialized cells."""

    def __init__(self, node_id: int, M: int, capacity: int, kdc_pubkey: bytes,
                 S: int = OFFER_SYMBOLS, modulus: int = DEFAULT_MODULUS):
        self.node_id = node_id
        self.M = M
        self.capacity = capacity
        self.S = S
        self.modulus = modulus
        self.kdc_pubkey = kdc_pubkey
        self.cells = np.zeros((M, capacity, S), dtype=np.int64)
        self.chain: list[Block] = []

    @property
    def height(self) -> int:
        return len(self.chain)

    @property
    def last_hash(self) -> bytes:
        return self.chain[-1].hash if self.chain else bytes(32)

    def validate_tx(self, tx: OfferTx) -> Optional[str]:
        if tx.certificate.subject != tx.po_pubkey or not tx.certificate.verify(self.kdc_pubkey):
            return "UNCERTIFIED"
        if not ed25519_verify(tx.po_pubkey, tx.signed_payload(), tx.signature):
            return "BAD_SIGNATURE"
        if tx.kind == TxKind.PUBLISH:
            offer = tx.offer
            if not 1 <= offer.cell <= self.M:
                return "BAD_CELL"
            if offer.po_id != po_fingerprint(tx.po_pubkey):
                return "FOREIGN_PO"
            if self._first_free_row(offer.cell) is None:
                return "CAPACITY"
            return None
        target = tx.target
        if not (1 <= target.cell <= self.M and 0 <= target.row < self.capacity):
            return "UNKNOWN_TARGET"
        row = self.cells[target.cell - 1, target.row]
        if not row.any():
            return "UNKNOWN_TARGET"
        stored = ParkingOffer.from_symbols(row.tolist())
        if stored.po_id != target.po_id or target.po_id != po_fingerprint(tx.po_pubkey):
            return "FOREIGN_PO"
        return None

    def validate_block(self, block: Block) -> Optional[str]:
        if block.height != self.height or block.prev_hash != self.last_hash:
            return "CHAIN_MISMATCH"
        for tx in block.txs:
            err = self.validate_tx(tx)
            if err:
                return err
        return None

    def apply_block(self, block: Block) -> list[Optional[OfferId]]:
        err = self.validate_block(block)
        if err:
            raise ValueError(f"refusing invalid block: {err}")
        ids: list[Optional[OfferId]] = []
        for tx in block.txs:
            if tx.kind == TxKind.PUBLISH:
                row = self._first_free_row(tx.offer.cell)
                self.cells[tx.offer.cell - 1, row] = tx.offer.to_symbols()
                ids.append(OfferId(tx.offer.po_id, tx.offer.cell, row))
            else:
                self.cells[tx.target.cell - 1, tx.target.row] = 0
                ids.append(None)
        self.chain.append(block)
        return ids

    def _first_free_row(self, cell: int) -> Optional[int]:
        occupied = self.cells[cell - 1].any(axis=1)
        free = np.flatnonzero(~occupied)
        return int(free[0]) if free.size else None

    def snapshot_bytes(self) -> bytes:
        """Cells flattened cell-major, row-major, two bytes per symbol."""
        return symbols_to_bytes(self.cells.reshape(-1).tolist())

    def snapshot_digest(self) -> str:
        return hashlib.sha256(self.snapshot_bytes()).hexdigest()


class Consortium:
    """Fixed-leader replication network over n ledger nodes."""

    def __init__(self, n: int, M: int, capacity: int, kdc_pubkey: bytes,
                 S: int = OFFER_SYMBOLS, clock: Optional[Callable[[], int]] = None):
        if n < 1:
            raise ValueError("need at least one node")
        self.nodes = [LedgerNode(j, M, capacity, kdc_pubkey, S=S) for j in range(1, n + 1)]
        self.leader = self.nodes[0]
        self.offline: set[int] = set()
        self.pending: list[OfferTx] = []
        self._ticks = 0
        self._clock = clock or self._default_clock

    def _default_clock(self) -> int:
        self._ticks += 1
        return self._ticks

    @property
    def n(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> LedgerNode:
        return self.nodes[node_id - 1]

    def submit(self, tx: OfferTx) -> AdmissionResult:
        err = self.leader.validate_tx(tx)
        if err:
            return AdmissionResult(False, error=err)
        block = Block(
            self.leader.height, self.leader.last_hash, self._clock(),
            self.leader.node_id, (tx,),
        )
        acks = 0
        for node in self.nodes:
            if node.node_id in self.offline:
                continue
            if node.validate_block(block) is None:
                acks += 1
        if acks <= self.n // 2:
            self.pending.append(tx)
            return AdmissionResult(False, error="NO_QUORUM")
        offer_id = None
        for node in self.nodes:
            if node.node_id in self.offline:
                continue
            ids = node.apply_block(block)
            if node is self.leader:
                offer_id = ids[0]
        return AdmissionResult(True, height=block.height, offer_id=offer_id)

    def retry_pending(self) -> list[AdmissionResult]:
        txs, self.pending = self.pending, []
        return [self.submit(tx) for tx in txs]

    def catch_up(self) -> None:
        """Replay leader blocks on any replica that fell behind while offline."""
        for node in self.nodes:
            if node.node_id in self.offline or node is self.leader:
                continue
            for block in self.leader.chain[node.height:]:
                node.apply_block(block)

    def honest_digests(self) -> list[str]:
        return [n.snapshot_digest() for n in self.nodes if n.node_id not in self.offline]


def dump_ledger(network: Consortium) -> bytes:
    """Flat binary: magic, modulus, n, M, capacity, S, then leader cells."""
    lead = network.leader
    header = (
        LEDGER_MAGIC
        + lead.modulus.to_bytes(4, "big")
        + network.n.to_bytes(2, "big")
        + lead.M.to_bytes(2, "big")
        + lead.capacity.to_bytes(2, "big")
        + lead.S.to_bytes(2, "big")
    )
    return header + lead.snapshot_bytes()


def load_ledger(data: bytes) -> tuple[dict, np.ndarray]:
    if data[:5] != LEDGER_MAGIC:
        raise ValueError("not a ledger dump")
    header = {
        "modulus": int.from_bytes(data[5:9], "big"),
        "n": int.from_bytes(data[9:11], "big"),
        "M": int.from_bytes(data[11:13], "big"),
        "capacity": int.from_bytes(data[13:15], "big"),
        "S": int.from_bytes(data[15:17], "big"),
    }
    body = data[17:]
    count = header["M"] * header["capacity"] * header["S"]
    if len(body) != 2 * count:
        raise ValueError("ledger body length mismatch")
    symbols = np.frombuffer(body, dtype=">u2").astype(np.int64)
    return header, symbols.reshape(header["M"], header["capacity"], header["S"])

"""Parking-offer data model and its fixed 40-byte wire layout.

Layout (big-endian): spaces u16 | cell u16 | owner id 20 bytes | latitude
s24 | longitude s24 | charging-station flag u8 | price code u8 | window
start u32 seconds | window duration u32 seconds. Coordinates are fixed-point
degrees times 10^4, which fits world ranges in 3 signed bytes each. The
owner id is the leading 20 bytes of a SHA-256 over the owner's verification
key; transactions carry the full key, the ledger row only this digest.

40 bytes is exactly 20 two-byte field symbols, so one offer occupies one
ledger row. An all-zero row is padding, never a valid offer (a valid offer
has cell >= 1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable

from .field import bytes_to_symbols, symbols_to_bytes

OFFER_BYTES = 40
OFFER_SYMBOLS = 20

_LAT_LIMIT = 90_0000
_LON_LIMIT = 180_0000


def po_fingerprint(po_pubkey: bytes) -> bytes:
    """20-byte ledger identity of a parking owner's verification key."""
    return hashlib.sha256(po_pubkey).digest()[:20]


@dataclass(frozen=True)
class ParkingOffer:
    spaces: int
    cell: int
    po_id: bytes
    lat_e4: int
    lon_e4: int
    charging: int
    price: int
    t_start: int
    t_duration: int

    def __post_init__(self):
        if not 0 <= self.spaces < 1 << 16:
            raise ValueError("spaces must fit u16")
        if not 1 <= self.cell < 1 << 16:
            raise ValueError("cell must be in 1..65535")
        if len(self.po_id) != 20:
            raise ValueError("po_id must be 20 bytes")
        if not -_LAT_LIMIT <= self.lat_e4 <= _LAT_LIMIT:
            raise ValueError("latitude out of range")
        if not -_LON_LIMIT <= self.lon_e4 <= _LON_LIMIT:
            raise ValueError("longitude out of range")
        if not 0 <= self.charging < 1 << 8 or not 0 <= self.price < 1 << 8:
            raise ValueError("charging and price must fit one byte")
        if not 0 <= self.t_start < 1 << 32 or not 0 <= self.t_duration < 1 << 32:
            raise ValueError("availability window must fit u32 seconds")

    def serialize(self) -> bytes:
        return b"".join(
            (
                self.spaces.to_bytes(2, "big"),
                self.cell.to_bytes(2, "big"),
                self.po_id,
                self.lat_e4.to_bytes(3, "big", signed=True),
                self.lon_e4.to_bytes(3, "big", signed=True),
                bytes((self.charging, self.price)),
                self.t_start.to_bytes(4, "big"),
                self.t_duration.to_bytes(4, "big"),
            )
        )

    @classmethod
    def deserialize(cls, data: bytes) -> "ParkingOffer":
        if len(data) != OFFER_BYTES:
            raise ValueError(f"offer must be {OFFER_BYTES} bytes, got {len(data)}")
        cell = int.from_bytes(data[2:4], "big")
        if cell == 0:
            raise ValueError("cell 0 is reserved for padding rows")
        return cls(
            spaces=int.from_bytes(data[0:2], "big"),
            cell=cell,
            po_id=data[4:24],
            lat_e4=int.from_bytes(data[24:27], "big", signed=True),
            lon_e4=int.from_bytes(data[27:30], "big", signed=True),
            charging=data[30],
            price=data[31],
            t_start=int.from_bytes(data[32:36], "big"),
            t_duration=int.from_bytes(data[36:40], "big"),
        )

    def to_symbols(self) -> list[int]:
        return bytes_to_symbols(self.serialize())

    @classmethod
    def from_symbols(cls, symbols: Iterable[int]) -> "ParkingOffer":
        return cls.deserialize(symbols_to_bytes(symbols))

    @property
    def window(self) -> tuple[int, int]:
        return (self.t_start, self.t_start + self.t_duration)

"""Deterministic end-to-end scenario harness.

One run walks the full protocol: KDC setup and owner certification, driver
registration, signed offer publication over the replicated ledger, private
cell retrieval under injected faults, anonymous reservation (encrypted
triple plus a credential showing, ACK/NACK, down-payment stub), and the
arrival challenge that ends with the reserved offer invalidated on chain.

Everything is a pure function of (config, seed): all randomness flows from
one seed sequence, network time is a logical clock advanced by bytes /
channel rate, and every protocol check (certificate, signature, pairing,
decode, replication equality, ground-truth match) is enforced, never
bypassed. A trace of (timestamp, actor, kind, size, digest) events feeds
the overhead report and the determinism tests.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from . import credentials, envelope
from .ledger import Consortium, OfferId, make_invalidate_tx, make_publish_tx
from .offers import OFFER_SYMBOLS, ParkingOffer, po_fingerprint
from .overhead import (
    OverheadReport,
    SizeTable,
    pir_download_bytes,
    reservation_request_bytes,
    stripe_exact_offers,
    trivial_download_bytes,
)
from .pairing import make_backend
from .pir import PirParams, PirQuery, PirResponse, make_answerer, retrieve_cell, retrieval_rate
from .privacy import CollusionObserver

RESERVATION_CT_LEN = 32 + 48 + 16


class ScenarioError(Exception):
    """A protocol invariant failed; the message names the violated check."""


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 9
    t: int = 1
    b: int = 1
    r: int = 1
    cells: int = 3
    cell_capacity: int = 10
    num_pos: int = 2
    num_drivers: int = 2
    offers_per_po: int = 3
    rng_seed: int = 42
    byzantine_nodes: tuple[int, ...] = ()
    unresponsive_nodes: tuple[int, ...] = ()
    colluding_nodes: tuple[int, ...] = ()
    channel_rate_bps: int = 10_000_000
    backend: str = "mock"
    # test hook: lets fault injection exceed the declared budget
    override_fault_budget: bool = False

    def validate(self) -> None:
        if self.n <= self.t + 2 * self.b + self.r:
            raise ScenarioError("config.n must exceed t + 2b + r")
        if min(self.t, 1) < 1 or self.b < 0 or self.r < 0:
            raise ScenarioError("config.t must be >= 1 and b, r >= 0")
        if self.cells < 1 or self.cell_capacity < 1:
            raise ScenarioError("config.cells and config.cell_capacity must be >= 1")
        if self.num_pos < 1 or self.num_drivers < 0 or self.offers_per_po < 0:
            raise ScenarioError("config actor counts out of range")
        if self.channel_rate_bps <= 0:
            raise ScenarioError("config.channel_rate_bps must be positive")
        for name, ids in (
            ("byzantine_nodes", self.byzantine_nodes),
            ("unresponsive_nodes", self.unresponsive_nodes),
            ("colluding_nodes", self.colluding_nodes),
        ):
            if len(set(ids)) != len(ids):
                raise ScenarioError(f"config.{name} contains duplicates")
            if any(not 1 <= j <= self.n for j in ids):
                raise ScenarioError(f"config.{name} references unknown node ids")
        if set(self.byzantine_nodes) & set(self.unresponsive_nodes):
            raise ScenarioError("a node cannot be both byzantine and unresponsive")
        if not self.override_fault_budget:
            if len(self.byzantine_nodes) > self.b:
                raise ScenarioError("config.byzantine_nodes exceeds budget b")
            if len(self.unresponsive_nodes) > self.r:
                raise ScenarioError("config.unresponsive_nodes exceeds budget r")
            if len(self.colluding_nodes) > self.t:
                raise ScenarioError("config.colluding_nodes exceeds threshold t")

    def to_json(self) -> str:
        data = asdict(self)
        for key in ("byzantine_nodes", "unresponsive_nodes", "colluding_nodes"):
            data[key] = list(data[key])
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        data = json.loads(text)
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ScenarioError(f"config field {key!r} is not recognized")
        for key in ("byzantine_nodes", "unresponsive_nodes", "colluding_nodes"):
            if key in data:
                data[key] = tuple(data[key])
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class TraceEvent:
    timestamp: int
    actor: str
    kind: str
    size: int
    digest: str

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


class Trace:
    """Event log with a logical clock driven by transferred bytes."""

    def __init__(self, channel_rate_bps: int):
        self.events: list[TraceEvent] = []
        self.now = 0
        self._bps = channel_rate_bps

    def record(self, actor: str, kind: str, payload: bytes) -> None:
        self.now += len(payload) * 8 * 1_000_000_000 // self._bps
        self.events.append(
            TraceEvent(
                self.now, actor, kind, len(payload),
                hashlib.sha256(payload).hexdigest(),
            )
        )

    def to_jsonl(self) -> str:
        return "".join(event.to_line() + "\n" for event in self.events)

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    def bytes_by_kind(self, kind: str) -> int:
        return sum(e.size for e in self.events if e.kind == kind)


class ReservationStatus(Enum):
    PENDING = "PENDING"
    ACK = "ACK"
    NACK = "NACK"
    CONFIRMED = "CONFIRMED"
    ARRIVED = "ARRIVED"
    COMPLETED = "COMPLETED"


@dataclass
class ReservationRecord:
    offer_id: OfferId
    ciphertext: bytes
    showing: credentials.RandomizedSig
    pk_d: bytes
    window: tuple[int, int]
    status: ReservationStatus = ReservationStatus.PENDING
    token: Optional[bytes] = None


class ParkingOwner:
    """Publishes signed offers and runs the reservation/arrival dialogue."""

    def __init__(self, name: str, kdc: credentials.Kdc, rng):
        self.name = name
        self.rng = rng
        self.sign_secret, self.sign_pub = envelope.ed25519_keypair(rng)
        self.enc_secret, self.enc_pub = envelope.x25519_keypair(rng)
        self.certificate = kdc.certify_po(self.sign_pub)
        self.po_id = po_fingerprint(self.sign_pub)
        self.offers: dict[OfferId, ParkingOffer] = {}
        # offer id -> list of (window, pk_d) holding a slot
        self.book: dict[OfferId, list[tuple[tuple[int, int], bytes]]] = {}
        self.pending_arrivals: dict[bytes, bytes] = {}
        self.deposits: dict[bytes, bytes] = {}

    def publish(self, offer: ParkingOffer, network: Consortium):
        tx = make_publish_tx(offer, self.sign_secret, self.sign_pub, self.certificate)
        result = network.submit(tx)
        if result.committed:
            self.offers[result.offer_id] = offer
            self.book.setdefault(result.offer_id, [])
        return tx, result

    def handle_reservation(self, ciphertext: bytes, showing, groups, gpk) -> Optional[bytes]:
        """Returns b"ACK"+offer id, b"NACK", or None for a discarded request."""
        if not credentials.verify_sig(groups, gpk, showing, ciphertext):
            return None
        try:
            plaintext = envelope.open_sealed(self.enc_secret, ciphertext)
        except envelope.EnvelopeError:
            return None
        pk_d, t_start, t_park = envelope.unpack_reservation(plaintext)
        window = (t_start, t_start + t_park)
        offer_id = self._offer_for_window(window)
        if offer_id is None:
            return b"NACK"
        self.book[offer_id].append((window, pk_d))
        return b"ACK" + offer_id.to_bytes()

    def _offer_for_window(self, window: tuple[int, int]) -> Optional[OfferId]:
        for offer_id, offer in self.offers.items():
            lo, hi = offer.window
            if not (lo <= window[0] and window[1] <= hi):
                continue
            overlapping = sum(
                1 for (w, _) in self.book[offer_id] if w[0] < window[1] and window[0] < w[1]
            )
            if overlapping < offer.spaces:
                return offer_id
        return None

    def accept_deposit(self, pk_d: bytes, token: bytes) -> None:
        self.deposits[pk_d] = token

    def challenge(self, pk_d: bytes) -> bytes:
        gamma = self.rng.bytes(32)
        self.pending_arrivals[pk_d] = gamma
        return gamma

    def admit(self, pk_d: bytes, response: bytes) -> bool:
        gamma = self.pending_arrivals.get(pk_d)
        if gamma is None or not envelope.ed25519_verify(pk_d, gamma, response):
            return False
        del self.pending_arrivals[pk_d]
        return True

    def release(self, offer_id: OfferId, network: Consortium):
        """Invalidate the reserved offer; republish with one fewer space."""
        offer = self.offers.pop(offer_id)
        txs = [make_invalidate_tx(offer_id, self.sign_secret, self.sign_pub, self.certificate)]
        results = [network.submit(txs[0])]
        if offer.spaces > 1:
            reduced = replace(offer, spaces=offer.spaces - 1)
            tx, result = self.publish(reduced, network)
            txs.append(tx)
            results.append(result)
        return txs, results


class Driver:
    """Holds a credential and drives retrieval, reservation, and arrival."""

    def __init__(self, driver_id: str, groups, gpk, rng):
        self.driver_id = driver_id
        self.groups = groups
        self.gpk = gpk
        self.rng = rng
        self.keys = credentials.driver_keygen(groups, gpk, driver_id, rng)
        self.credential: Optional[credentials.DriverCredential] = None
        self.records: list[ReservationRecord] = []
        self._eph_secret = None

    def register(self, kdc: credentials.Kdc) -> None:
        sigma1, sigma2 = kdc.register(self.keys.request())
        self.credential = credentials.finalize_credential(
            self.groups, self.gpk, self.keys.a2, sigma1, sigma2
        )

    def build_reservation(self, po_enc_pub: bytes, offer: ParkingOffer,
                          offer_id: OfferId) -> tuple[bytes, ReservationRecord]:
        self._eph_secret, pk_d = envelope.ed25519_keypair(self.rng)
        window = (offer.t_start, offer.t_start + min(3600, offer.t_duration))
        plaintext = envelope.pack_reservation(pk_d, window[0], window[1] - window[0])
        ciphertext = envelope.seal(po_enc_pub, plaintext, self.rng)
        showing = credentials.randomized_sign(self.groups, self.credential, ciphertext, self.rng)
        request = ciphertext + showing.to_bytes(self.groups.order)
        for secret_bytes, what in (
            (self.keys.a_pub.to_bytes(), "long-term public key"),
            (self.keys.gamma.to_bytes(), "credential gamma"),
            (self.driver_id.encode(), "driver id"),
        ):
            if secret_bytes in request:
                raise ScenarioError(f"anonymity: reservation leaks the {what}")
        record = ReservationRecord(offer_id, ciphertext, showing, pk_d, window)
        self.records.append(record)
        return request, record

    def answer_challenge(self, gamma: bytes) -> bytes:
        return envelope.ed25519_sign(self._eph_secret, gamma)


def byzantine_wrap(inner, rng, params: PirParams):
    """Replace every response symbol with an independent uniform element."""

    def answer(query: PirQuery) -> PirResponse:
        resp = inner(query)
        if not resp.responsive:
            return resp
        garbage = tuple(
            int(v) for v in rng.integers(0, params.field.p, size=params.S)
        )
        return PirResponse(resp.field, resp.node_index, resp.stripe_index, garbage)

    return answer


def unresponsive_wrap(params: PirParams):
    def answer(query: PirQuery) -> PirResponse:
        return PirResponse.timeout(params.field, query.node_index, query.stripe_index)

    return answer


@dataclass
class RetrievalAudit:
    """Everything the privacy tests need about one retrieval."""

    driver_id: str
    desired_cell: int
    queries: list[PirQuery]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trace: Trace
    ledger_digests: list[str]
    statuses: dict[str, str]
    report: OverheadReport
    observer: Optional[CollusionObserver]
    audits: list[RetrievalAudit]

    @property
    def trace_digest(self) -> str:
        return self.trace.digest()


def _assert_replicated(network: Consortium) -> None:
    digests = network.honest_digests()
    if len(set(digests)) != 1:
        raise ScenarioError("replication: honest node snapshots diverge")


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    config.validate()
    groups = make_backend(config.backend)
    seeds = np.random.SeedSequence(config.rng_seed).spawn(
        3 + config.num_pos + config.num_drivers
    )
    kdc_rng, world_rng, byz_rng = (np.random.default_rng(s) for s in seeds[:3])
    po_rngs = [np.random.default_rng(s) for s in seeds[3 : 3 + config.num_pos]]
    driver_rngs = [
        np.random.default_rng(s) for s in seeds[3 + config.num_pos :]
    ]
    trace = Trace(config.channel_rate_bps)
    params = PirParams(
        n=config.n, t=config.t, b=config.b, r=config.r,
        M=config.cells, S=OFFER_SYMBOLS,
    )

    # phase 1: initialization
    kdc = credentials.Kdc(groups, kdc_rng)
    network = Consortium(
        config.n, config.cells, config.cell_capacity, kdc.cert_pubkey,
        clock=lambda: trace.now,
    )
    owners = []
    for i, rng in enumerate(po_rngs):
        owner = ParkingOwner(f"po-{i + 1}", kdc, rng)
        trace.record(owner.name, "po-certificate", owner.certificate.to_bytes())
        owners.append(owner)
    drivers = []
    for i, rng in enumerate(driver_rngs):
        driver = Driver(f"driver-{i + 1}", groups, kdc.gpk, rng)
        req = driver.keys.request()
        req_bytes = (
            req.a_pub.to_bytes() + req.gamma.to_bytes() + req.gamma_tilde.to_bytes()
        )
        trace.record(driver.driver_id, "register", req_bytes)
        driver.register(kdc)
        drivers.append(driver)

    # phase 2: offer publication
    directory: dict[bytes, ParkingOwner] = {}
    for owner in owners:
        directory[owner.po_id] = owner
        for _ in range(config.offers_per_po):
            offer = ParkingOffer(
                spaces=int(world_rng.integers(1, 3)),
                cell=int(world_rng.integers(1, config.cells + 1)),
                po_id=owner.po_id,
                lat_e4=int(world_rng.integers(-90_0000, 90_0001)),
                lon_e4=int(world_rng.integers(-180_0000, 180_0001)),
                charging=int(world_rng.integers(0, 2)),
                price=int(world_rng.integers(1, 100)),
                t_start=1_000_000,
                t_duration=24 * 3600,
            )
            tx, result = owner.publish(offer, network)
            if not result.committed:
                raise ScenarioError(f"offer admission failed: {result.error}")
            trace.record(owner.name, "offer-tx", tx.to_bytes())
            _assert_replicated(network)

    ground_truth = network.leader.cells.copy()
    observer = (
        CollusionObserver(tuple(config.colluding_nodes), config.t)
        if config.colluding_nodes
        else None
    )

    # phase 3: private retrieval
    audits: list[RetrievalAudit] = []
    populated = sorted(
        {offer.cell for owner in owners for offer in owner.offers.values()}
    )
    statuses: dict[str, str] = {}
    retrieved: dict[str, list[tuple[int, ...]]] = {}
    for driver in drivers:
        desired = int(world_rng.choice(populated)) if populated else 1
        audit = RetrievalAudit(driver.driver_id, desired, [])
        coalition_seen: list[PirQuery] = []

        def metered(node_id: int, inner):
            def answer(query: PirQuery) -> PirResponse:
                trace.record(driver.driver_id, "pir-query", query.to_bytes())
                audit.queries.append(query)
                if observer and node_id in observer.node_ids:
                    coalition_seen.append(query)
                resp = inner(query)
                trace.record(f"node-{node_id}", "pir-response", resp.to_bytes())
                return resp

            return answer

        answerers = []
        for node in network.nodes:
            base = make_answerer(node.cells, params)
            if node.node_id in config.unresponsive_nodes:
                base = unresponsive_wrap(params)
            elif node.node_id in config.byzantine_nodes:
                base = byzantine_wrap(base, byz_rng, params)
            answerers.append(metered(node.node_id, base))
        rows = retrieve_cell(answerers, params, desired, config.cell_capacity, driver.rng)
        truth = [
            tuple(int(v) for v in row)
            for row in ground_truth[desired - 1]
            if row.any()
        ]
        if rows != truth:
            raise ScenarioError("retrieval: decoded rows differ from ledger ground truth")
        retrieved[driver.driver_id] = rows
        if observer:
            for stripe in range(params.stripes(config.cell_capacity)):
                batch = [q for q in coalition_seen if q.stripe_index == stripe]
                if batch:
                    observer.record(batch, desired)
        audits.append(audit)

    # phase 4: reservation
    for driver in drivers:
        statuses[driver.driver_id] = ReservationStatus.PENDING.value
        offers_seen = [
            (idx, ParkingOffer.from_symbols(row))
            for idx, row in enumerate(retrieved[driver.driver_id])
        ]
        reserved = None
        for row_idx, offer in offers_seen:
            owner = directory.get(offer.po_id)
            if owner is None:
                continue
            # the retrieved copy may be stale (another driver already took
            # the row); the request names only a window, so the owner is
            # free to allocate any of its live offers covering it
            offer_id = next(
                (oid for oid, off in owner.offers.items() if off == offer),
                OfferId(offer.po_id, offer.cell, row_idx),
            )
            request, record = driver.build_reservation(owner.enc_pub, offer, offer_id)
            trace.record(driver.driver_id, "resv-request", request)
            reply = owner.handle_reservation(record.ciphertext, record.showing, groups, kdc.gpk)
            if reply is None:
                raise ScenarioError("reservation: owner discarded an honest request")
            trace.record(owner.name, "resv-reply", reply)
            if reply.startswith(b"ACK"):
                record.status = ReservationStatus.ACK
                alloc_id = OfferId.from_bytes(reply[3:])
                token = driver.rng.bytes(16)
                record.token = token
                owner.accept_deposit(record.pk_d, token)
                trace.record(driver.driver_id, "down-payment", token)
                record.status = ReservationStatus.CONFIRMED
                reserved = (driver, owner, record, alloc_id)
                break
            record.status = ReservationStatus.NACK
        if reserved is None:
            statuses[driver.driver_id] = (
                driver.records[-1].status.value if driver.records else "PENDING"
            )
            continue

        # phase 5: arrival and ledger invalidation
        driver_, owner, record, alloc_id = reserved
        gamma = owner.challenge(record.pk_d)
        trace.record(owner.name, "challenge", gamma)
        response = driver_.answer_challenge(gamma)
        trace.record(driver_.driver_id, "challenge-response", response)
        if not owner.admit(record.pk_d, response):
            raise ScenarioError("arrival: owner rejected an honest challenge response")
        record.status = ReservationStatus.ARRIVED
        txs, results = owner.release(alloc_id, network)
        for tx, result in zip(txs, results):
            if not result.committed:
                raise ScenarioError(f"invalidation failed: {result.error}")
            trace.record(owner.name, "offer-tx", tx.to_bytes())
        _assert_replicated(network)
        record.status = ReservationStatus.COMPLETED
        statuses[driver_.driver_id] = record.status.value

    # overhead accounting (payload bytes: 2 per symbol)
    stripes = params.stripes(config.cell_capacity)
    per_driver_down = stripes * (config.n - len(config.unresponsive_nodes)) * params.S * 2
    per_driver_up = stripes * config.n * config.cells * params.L * 2
    resv_events = [e.size for e in trace.events if e.kind == "resv-request"]
    arrival_bytes = trace.bytes_by_kind("challenge") + trace.bytes_by_kind(
        "challenge-response"
    )
    report = OverheadReport(
        measured_pir_download=per_driver_down * len(drivers),
        measured_pir_upload=per_driver_up * len(drivers),
        measured_reservation_request=resv_events[0] if resv_events else 0,
        measured_arrival_exchange=arrival_bytes,
        analytic_pir_download=pir_download_bytes(
            stripe_exact_offers(config.cell_capacity, params), params
        ),
        analytic_reservation_request=reservation_request_bytes(SizeTable()),
        retrieval_rate=retrieval_rate(params),
        trivial_download=trivial_download_bytes(config.cells, config.cell_capacity),
    )
    return ScenarioResult(
        config=config,
        trace=trace,
        ledger_digests=network.honest_digests(),
        statuses=statuses,
        report=report,
        observer=observer,
        audits=audits,
    )


def run_reservation_race(seed: int) -> tuple[int, int]:
    """Two drivers race for a single-space offer; returns (acks, nacks)."""
    groups = make_backend("mock")
    seeds = np.random.SeedSequence(seed).spawn(4)
    kdc_rng, po_rng, d1_rng, d2_rng = (np.random.default_rng(s) for s in seeds)
    kdc = credentials.Kdc(groups, kdc_rng)
    owner = ParkingOwner("po-race", kdc, po_rng)
    offer = ParkingOffer(
        spaces=1, cell=1, po_id=owner.po_id, lat_e4=0, lon_e4=0,
        charging=0, price=5, t_start=1_000_000, t_duration=7200,
    )
    offer_id = OfferId(owner.po_id, 1, 0)
    owner.offers[offer_id] = offer
    owner.book[offer_id] = []
    records = []
    for i, rng in enumerate((d1_rng, d2_rng)):
        driver = Driver(f"racer-{i + 1}", groups, kdc.gpk, rng)
        driver.register(kdc)
        _, record = driver.build_reservation(owner.enc_pub, offer, offer_id)
        records.append(record)
    # both requests are built before either is delivered; the arrival order
    # at the owner is part of the race and depends only on the seed
    if po_rng.integers(0, 2):
        records.reverse()
    replies = [
        owner.handle_reservation(rec.ciphertext, rec.showing, groups, kdc.gpk)
        for rec in records
    ]
    acks = sum(1 for rep in replies if rep and rep.startswith(b"ACK"))
    nacks = sum(1 for rep in replies if rep == b"NACK")
    return acks, nacks

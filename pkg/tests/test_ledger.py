"""Replicated-ledger tests: admission, replication equality, chain shape."""

import numpy as np
import pytest

from parkpir.credentials import Certificate, Kdc
from parkpir.envelope import ed25519_keypair
from parkpir.ledger import (
    AdmissionResult,
    Consortium,
    OfferId,
    OfferTx,
    TxKind,
    dump_ledger,
    load_ledger,
    make_invalidate_tx,
    make_publish_tx,
)
from parkpir.offers import ParkingOffer, po_fingerprint
from parkpir.pairing import make_backend


@pytest.fixture
def world():
    rng = np.random.default_rng(77)
    kdc = Kdc(make_backend("mock"), rng)
    po_secret, po_pub = ed25519_keypair(rng)
    cert = kdc.certify_po(po_pub)
    net = Consortium(n=5, M=3, capacity=4, kdc_pubkey=kdc.cert_pubkey)
    return rng, kdc, po_secret, po_pub, cert, net


def offer_for(po_pub, cell=1, spaces=2, start=1000, dur=3600, price=10):
    return ParkingOffer(
        spaces=spaces, cell=cell, po_id=po_fingerprint(po_pub),
        lat_e4=10_0000, lon_e4=20_0000, charging=0, price=price,
        t_start=start, t_duration=dur,
    )


class TestAdmission:
    def test_happy_path_replicates_everywhere(self, world):
        _, _, po_secret, po_pub, cert, net = world
        tx = make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert)
        res = net.submit(tx)
        assert res.committed and res.offer_id == OfferId(po_fingerprint(po_pub), 1, 0)
        expected = offer_for(po_pub).to_symbols()
        for node in net.nodes:
            assert node.cells[0, 0].tolist() == expected
        assert len(set(net.honest_digests())) == 1

    def test_uncertified_po_rejected(self, world):
        rng, _, _, _, _, net = world
        rogue_secret, rogue_pub = ed25519_keypair(rng)
        fake_cert = Certificate(rogue_pub, rng.bytes(64))
        tx = make_publish_tx(offer_for(rogue_pub), rogue_secret, rogue_pub, fake_cert)
        res = net.submit(tx)
        assert not res.committed and res.error == "UNCERTIFIED"
        for node in net.nodes:
            assert not node.cells.any()

    def test_bad_signature_rejected(self, world):
        rng, _, po_secret, po_pub, cert, net = world
        tx = make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert)
        bad = OfferTx(tx.kind, tx.offer, tx.target, tx.po_pubkey, tx.certificate, rng.bytes(64))
        res = net.submit(bad)
        assert not res.committed and res.error == "BAD_SIGNATURE"

    def test_cell_out_of_range_rejected(self, world):
        _, _, po_secret, po_pub, cert, net = world
        tx = make_publish_tx(offer_for(po_pub, cell=4), po_secret, po_pub, cert)
        assert net.submit(tx).error == "BAD_CELL"

    def test_capacity_exhaustion(self, world):
        _, _, po_secret, po_pub, cert, net = world
        for i in range(4):
            tx = make_publish_tx(offer_for(po_pub, price=i), po_secret, po_pub, cert)
            assert net.submit(tx).committed
        overflow = make_publish_tx(offer_for(po_pub, price=99), po_secret, po_pub, cert)
        res = net.submit(overflow)
        assert not res.committed and res.error == "CAPACITY"

    def test_foreign_fingerprint_rejected(self, world):
        rng, kdc, po_secret, po_pub, cert, net = world
        _, other_pub = ed25519_keypair(rng)
        wrong_owner = offer_for(other_pub)
        tx = make_publish_tx(wrong_owner, po_secret, po_pub, cert)
        assert net.submit(tx).error == "FOREIGN_PO"


class TestInvalidate:
    def test_publish_then_invalidate_restores_state(self, world):
        _, _, po_secret, po_pub, cert, net = world
        before = [n.snapshot_bytes() for n in net.nodes]
        res = net.submit(make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert))
        inv = make_invalidate_tx(res.offer_id, po_secret, po_pub, cert)
        assert net.submit(inv).committed
        for node, prior in zip(net.nodes, before):
            assert node.snapshot_bytes() == prior

    def test_foreign_po_cannot_invalidate(self, world):
        rng, kdc, po_secret, po_pub, cert, net = world
        res = net.submit(make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert))
        thief_secret, thief_pub = ed25519_keypair(rng)
        thief_cert = kdc.certify_po(thief_pub)
        inv = make_invalidate_tx(res.offer_id, thief_secret, thief_pub, thief_cert)
        assert net.submit(inv).error == "FOREIGN_PO"

    def test_unknown_target_rejected(self, world):
        _, _, po_secret, po_pub, cert, net = world
        ghost = OfferId(po_fingerprint(po_pub), 1, 2)
        inv = make_invalidate_tx(ghost, po_secret, po_pub, cert)
        assert net.submit(inv).error == "UNKNOWN_TARGET"


class TestChain:
    def test_prev_hash_links(self, world):
        _, _, po_secret, po_pub, cert, net = world
        for i in range(3):
            net.submit(make_publish_tx(offer_for(po_pub, price=i), po_secret, po_pub, cert))
        chain = net.leader.chain
        assert chain[0].prev_hash == bytes(32)
        for prev, block in zip(chain, chain[1:]):
            assert block.prev_hash == prev.hash
            assert block.height == prev.height + 1

    def test_cell_isolation(self, world):
        _, _, po_secret, po_pub, cert, net = world
        net.submit(make_publish_tx(offer_for(po_pub, cell=2), po_secret, po_pub, cert))
        before_other = net.leader.cells[[0, 2]].copy()
        net.submit(make_publish_tx(offer_for(po_pub, cell=2, price=9), po_secret, po_pub, cert))
        assert np.array_equal(net.leader.cells[[0, 2]], before_other)

    def test_no_quorum_then_retry(self, world):
        _, _, po_secret, po_pub, cert, net = world
        net.offline = {3, 4, 5}
        tx = make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert)
        res = net.submit(tx)
        assert not res.committed and res.error == "NO_QUORUM"
        assert not net.leader.cells.any()
        net.offline = set()
        results = net.retry_pending()
        assert [r.committed for r in results] == [True]
        net.catch_up()
        assert len(set(n.snapshot_digest() for n in net.nodes)) == 1

    def test_offline_node_catches_up(self, world):
        _, _, po_secret, po_pub, cert, net = world
        net.offline = {5}
        net.submit(make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert))
        assert net.node(5).height == 0
        net.offline = set()
        net.catch_up()
        assert net.node(5).snapshot_digest() == net.leader.snapshot_digest()


class TestSerialization:
    def test_tx_round_trip(self, world):
        _, _, po_secret, po_pub, cert, net = world
        tx = make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert)
        assert OfferTx.from_bytes(tx.to_bytes()) == tx
        inv = make_invalidate_tx(OfferId(po_fingerprint(po_pub), 1, 0), po_secret, po_pub, cert)
        assert OfferTx.from_bytes(inv.to_bytes()) == inv

    def test_snapshot_geometry(self, world):
        _, _, _, _, _, net = world
        assert len(net.leader.snapshot_bytes()) == 3 * 4 * 20 * 2

    def test_dump_load_round_trip(self, world):
        _, _, po_secret, po_pub, cert, net = world
        net.submit(make_publish_tx(offer_for(po_pub), po_secret, po_pub, cert))
        header, cells = load_ledger(dump_ledger(net))
        assert header == {"modulus": 65537, "n": 5, "M": 3, "capacity": 4, "S": 20}
        assert np.array_equal(cells, net.leader.cells)

    def test_dump_rejects_garbage(self):
        with pytest.raises(ValueError):
            load_ledger(b"nope" + bytes(40))

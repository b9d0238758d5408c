"""Bilinear-backend tests: algebra, serialization, and op counting."""

import numpy as np
import pytest

from parkpir.field import is_prime
from parkpir.pairing import (
    CURVE_H,
    CURVE_Q,
    CURVE_RHO,
    MOCK_ORDER,
    CurvePairing,
    MockPairing,
    OpCounter,
    count_ops,
    make_backend,
    zp_add,
    zp_mul,
)


@pytest.fixture(params=["mock", "curve"])
def groups(request):
    return make_backend(request.param)


class TestAlgebra:
    def test_constants_prime(self):
        assert is_prime(MOCK_ORDER)
        assert is_prime(CURVE_RHO) and is_prime(CURVE_Q)
        assert CURVE_Q + 1 == CURVE_H * CURVE_RHO
        assert CURVE_Q % 4 == 3

    def test_bilinearity_random_exponents(self, groups):
        rng = np.random.default_rng(5)
        for _ in range(5):
            a = int(rng.integers(1, 2**60))
            b = int(rng.integers(1, 2**60))
            lhs = groups.pair(groups.g1 ** a, groups.g2 ** b)
            rhs = groups.pair(groups.g1, groups.g2) ** (a * b % groups.order)
            assert lhs == rhs

    def test_non_degenerate(self, groups):
        assert not groups.pair(groups.g1, groups.g2).is_identity

    def test_generator_order(self, groups):
        assert (groups.g1 ** groups.order).is_identity
        assert (groups.g2 ** groups.order).is_identity

    def test_negative_exponent_is_inverse(self, groups):
        e = groups.pair(groups.g1, groups.g2)
        assert ((e ** 5) * (e ** -5)).is_identity
        assert ((groups.g1 ** 7) * (groups.g1 ** -7)).is_identity

    def test_pairing_with_identity(self, groups):
        ident = groups.g1 ** 0
        assert ident.is_identity
        assert groups.pair(ident, groups.g2).is_identity

    def test_mul_matches_exponent_addition(self, groups):
        x = (groups.g1 ** 11) * (groups.g1 ** 31)
        assert x == groups.g1 ** 42


class TestSerialization:
    def test_group_tags_distinct_in_mock(self):
        g = MockPairing()
        assert g.g1.to_bytes() != g.g2.to_bytes()

    def test_curve_point_round_trip_width(self):
        g = CurvePairing()
        data = (g.g1 ** 1234).to_bytes()
        width = (CURVE_Q.bit_length() + 7) // 8
        assert len(data) == 1 + 2 * width

    def test_distinct_elements_distinct_bytes(self, groups):
        assert (groups.g1 ** 2).to_bytes() != (groups.g1 ** 3).to_bytes()

    def test_hash_to_scalar_range_and_stability(self, groups):
        a = groups.hash_to_scalar(b"x", b"y")
        assert 0 <= a < groups.order
        assert a == groups.hash_to_scalar(b"x", b"y")
        assert a != groups.hash_to_scalar(b"xy", b"")

    def test_mock_cross_group_mul_rejected(self):
        g = MockPairing()
        with pytest.raises(TypeError):
            g.g1 * g.g2
        with pytest.raises(TypeError):
            g.pair(g.g2, g.g2)


class TestCounting:
    def test_counts_accumulate(self):
        g = MockPairing()
        with count_ops() as c:
            _ = g.g1 ** 3
            _ = g.g1 * g.g1
            _ = g.pair(g.g1, g.g2)
            _ = g.hash_to_scalar(b"m")
            _ = zp_add(1, 2, g.order)
            _ = zp_mul(3, 4, g.order)
        assert c.as_dict() == {"exp": 1, "mul": 2, "add": 1, "hash": 1, "pairing": 1}

    def test_nested_counters_both_tick(self):
        g = MockPairing()
        with count_ops() as outer:
            _ = g.g1 ** 2
            with count_ops() as inner:
                _ = g.g1 ** 2
        assert outer.exp == 2 and inner.exp == 1

    def test_no_ambient_counter_is_free(self):
        g = MockPairing()
        _ = g.g1 ** 2
        assert OpCounter().exp == 0

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            make_backend("bn254")

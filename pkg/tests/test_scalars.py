"""Exact scalar layer: rationals and the quadratic extension a + b*sqrt(2)."""

from decimal import Decimal, getcontext

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from conerisk.corpus import Lcg
from conerisk.scalars import (SQRT2, Quad2, parse_scalar, rat, scalar_cmp,
                              scalar_to_json, sign)

getcontext().prec = 60

rationals = st.fractions(max_denominator=1000).map(
    lambda f: mpq(f.numerator, f.denominator))
quads = st.tuples(rationals, rationals).map(lambda ab: Quad2(ab[0], ab[1]))


def quad_to_decimal(x: Quad2) -> Decimal:
    root2 = Decimal(2).sqrt()
    return (Decimal(int(x.a.numerator)) / Decimal(int(x.a.denominator))
            + (Decimal(int(x.b.numerator)) / Decimal(int(x.b.denominator)))
            * root2)


def test_sqrt2_squares_to_two():
    assert SQRT2 * SQRT2 == Quad2(2, 0)
    assert SQRT2 * SQRT2 == mpq(2)


def test_sign_rule_examples():
    assert sign(Quad2(0, 0)) == 0
    assert sign(Quad2(-1, 1)) > 0      # sqrt(2) > 1
    assert sign(Quad2(rat(3, 2), -1)) > 0   # 3/2 > sqrt(2)
    assert sign(Quad2(rat(7, 5), -1)) < 0   # 7/5 < sqrt(2)


def test_quad2_sign_matches_high_precision_decimal_on_1000_inputs():
    """Engine bar: exact sign logic vs 50-digit decimal on 1000 inputs."""
    getcontext().prec = 50
    rng = Lcg(42)
    for _ in range(1000):
        a = mpq(rng.rand_int(-50, 50), rng.rand_int(1, 20))
        b = mpq(rng.rand_int(-50, 50), rng.rand_int(1, 20))
        x = Quad2(a, b)
        approx = quad_to_decimal(x)
        # sqrt(2) is irrational, so a nonzero pair never hits exact zero
        # and 50 digits dominate the coefficient sizes used here
        dec_sign = 0 if approx == 0 else (1 if approx > 0 else -1)
        assert sign(x) == dec_sign, (a, b)


@given(quads, quads, quads)
@settings(max_examples=200, deadline=None)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x
    assert x * y == y * x
    assert x + Quad2(0, 0) == x
    assert x * Quad2(1, 0) == x


@given(quads)
@settings(max_examples=200, deadline=None)
def test_inverse(x):
    if sign(x) != 0:
        assert x * x.inverse() == Quad2(1, 0)


@given(quads, quads)
@settings(max_examples=200, deadline=None)
def test_order_compatible_with_arithmetic(x, y):
    c = scalar_cmp(x, y)
    assert c == sign(x - y)
    if c < 0:
        assert x < y
    elif c > 0:
        assert x > y
    else:
        assert x == y


@given(quads)
@settings(max_examples=100, deadline=None)
def test_json_round_trip_quad(x):
    assert parse_scalar(scalar_to_json(x)) == x


@given(rationals)
@settings(max_examples=100, deadline=None)
def test_json_round_trip_rational(x):
    back = parse_scalar(scalar_to_json(x))
    assert back == x and isinstance(back, type(mpq(0)))


def test_rational_embeds_in_quad():
    assert Quad2(rat(3, 4), 0) == rat(3, 4)
    assert hash(Quad2(rat(3, 4), 0)) == hash(rat(3, 4))
    assert Quad2(1, 1) != mpq(2)


def test_parse_scalar_forms():
    assert parse_scalar("3/7") == rat(3, 7)
    assert parse_scalar({"a": "1", "b": "1/2"}) == Quad2(1, rat(1, 2))
    with pytest.raises((ValueError, TypeError)):
        parse_scalar([1, 2])

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from galedim.numbers import (
    ExactScale,
    LogExponent,
    Surd,
    SurdField,
    as_fraction,
    format_surd,
    make_arith,
    mp,
    parse_surd,
    precision,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)


def test_field_degree_reduces_for_perfect_powers():
    assert SurdField(2, 2).degree == 2
    # 4 = 2^2, so 4^(1/2) is rational and the field collapses.
    assert SurdField(4, 2).degree == 1
    assert SurdField(8, 6).degree == 2


def test_square_root_squares_to_base():
    r = SurdField(2, 2).base_power(Fraction(1, 2))
    assert r * r == 2
    assert format_surd(r * r) == "2"


def test_mixed_fields_promote():
    a = SurdField(2, 2).base_power(Fraction(1, 2))
    b = SurdField(2, 3).base_power(Fraction(1, 3))
    prod = a * b
    assert abs(float(prod) - 2 ** (5 / 6)) < 1e-12
    assert prod == SurdField(2, 6).base_power(Fraction(5, 6))


@given(rationals, rationals, st.sampled_from([2, 3, 5]), st.integers(1, 6))
def test_surd_sign_matches_float(a, b, base, q):
    u = SurdField(base, q).base_power(Fraction(1, q))
    x = u * a + b
    approx = float(a) * base ** (1 / q) + float(b)
    if abs(approx) > 1e-9:
        assert x.sign() == (1 if approx > 0 else -1)
    assert abs(float(x) - approx) < 1e-9 * max(1, abs(approx))


@given(rationals, rationals, st.sampled_from([2, 3]), st.integers(1, 4))
def test_format_parse_round_trip(a, b, base, q):
    x = SurdField(base, q).base_power(Fraction(-1, q)) * a + b
    back = parse_surd(format_surd(x))
    assert back == x


def test_parse_plain_rational():
    assert parse_surd("3/4") == Fraction(3, 4)
    assert parse_surd("1.5") == Fraction(3, 2)


def test_ordering_is_exact():
    half = SurdField(3, 2).base_power(Fraction(-1, 2))
    # 3^(-1/2) = 0.577..., between 0.57 and 0.58.
    assert Fraction(57, 100) < half < Fraction(58, 100)
    assert half * half == Fraction(1, 3)


def test_arith_exact_and_float_modes_agree():
    ex = make_arith(2, Fraction(1, 2))
    fl = make_arith(2, Fraction(1, 2), exact=False)
    assert ex.exact and not fl.exact
    a = ex.diam_power(5, Fraction(1, 2))
    b = fl.diam_power(5, Fraction(1, 2))
    assert abs(float(a) - float(b)) < 1e-15
    assert fl.eq(b, b * (1 + mpmath.mpf(2) ** -80))
    assert not fl.eq(b, b * (1 + mpmath.mpf(2) ** -30))


def test_large_denominators_fall_back_to_float():
    assert not make_arith(2, Fraction(1, 97)).exact
    assert not make_arith(2, 0.5).exact


def test_log_exponent_and_exact_scale():
    s = LogExponent(2, 3)
    assert abs(float(s) - 0.6309297535714574) < 1e-15
    d = ExactScale(3, 2)
    assert d.value() == Fraction(1, 8)
    assert d.log2_value == -3
    assert ExactScale(2, 3) > ExactScale(3, 3)
    assert ExactScale.zero(2).is_zero


def test_precision_env(monkeypatch):
    monkeypatch.setenv("GALEDIM_PRECISION", "200")
    assert precision() == 200
    assert mp().prec == 200
    monkeypatch.setenv("GALEDIM_PRECISION", "12")
    with pytest.raises(ValueError):
        precision()


def test_as_fraction_text():
    assert as_fraction("2/6") == Fraction(1, 3)
    assert isinstance(Surd.of(Fraction(1, 2), 2), Surd)

from __future__ import annotations

from fractions import Fraction

import pytest

from tamebars.field import GF2, QQ, FieldError, PrimeField, field_from_spec


def test_rational_basics():
    assert QQ.parse("3/2") == Fraction(3, 2)
    assert QQ.add(Fraction(1, 3), Fraction(1, 6)) == Fraction(1, 2)
    assert QQ.inv(Fraction(-2, 5)) == Fraction(-5, 2)
    assert QQ.to_str(Fraction(-7, 3)) == "-7/3"


def test_rational_zero_division():
    with pytest.raises(FieldError):
        QQ.inv(Fraction(0))


def test_prime_field_arithmetic():
    f5 = PrimeField(5)
    assert f5.add(3, 4) == 2
    assert f5.mul(3, 4) == 2
    assert f5.inv(3) == 2  # 3*2 = 6 = 1 mod 5
    assert f5.neg(2) == 3
    assert f5.from_int(-1) == 4


def test_prime_field_parse_fraction_string():
    f5 = PrimeField(5)
    # "1/2" means 1 * inverse(2) = 3 mod 5
    assert f5.parse("1/2") == 3
    assert GF2.parse("1") == 1


def test_prime_field_rejects_composite_and_huge():
    with pytest.raises(FieldError):
        PrimeField(6)
    with pytest.raises(FieldError):
        PrimeField(2**31 + 11)
    with pytest.raises(FieldError):
        PrimeField(1)


def test_field_from_spec_round_trip():
    assert field_from_spec("Q") is QQ or field_from_spec("Q") == QQ
    f = field_from_spec({"Fp": 7})
    assert isinstance(f, PrimeField) and f.p == 7
    assert f.to_spec() == {"Fp": 7}
    assert QQ.to_spec() == "Q"
    with pytest.raises(FieldError):
        field_from_spec({"Fp": "7"})
    with pytest.raises(FieldError):
        field_from_spec("R")

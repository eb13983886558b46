from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from realstreams.exactnum import (Q, RATIONALS, cantor_pair, cantor_unpair, clamp,
                                  format_rational, parse_rational, pow2, rationals, tuple_pair,
                                  tuple_unpair)

nat = st.integers(min_value=0, max_value=10 ** 6)


def test_pairing_small_values():
    # <i,j> = (i+j)(i+j+1)/2 + j
    assert [cantor_pair(i, j) for i, j in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]] \
        == [0, 1, 2, 3, 4, 5]
    assert cantor_pair(3, 4) == 32


@given(nat, nat)
def test_pair_unpair_roundtrip(i, j):
    assert cantor_unpair(cantor_pair(i, j)) == (i, j)


@given(nat)
def test_unpair_pair_roundtrip(n):
    assert cantor_pair(*cantor_unpair(n)) == n


@given(st.lists(st.integers(min_value=0, max_value=200), min_size=1, max_size=4))
def test_tuple_roundtrip(idx):
    assert tuple_unpair(tuple_pair(*idx), len(idx)) == tuple(idx)


def test_tuple_is_left_associated():
    assert tuple_pair(1, 2, 3) == cantor_pair(cantor_pair(1, 2), 3)
    assert tuple_pair(7) == 7


def test_pairing_rejects_negatives():
    with pytest.raises(ValueError):
        cantor_pair(-1, 0)
    with pytest.raises(ValueError):
        tuple_unpair(3, 0)


def _brute_rationals(max_height):
    out = [Fraction(0)]
    for h in range(2, max_height + 1):
        level = set()
        for q in range(1, h):
            for p in (h - q, -(h - q)):
                x = Fraction(p, q)
                if abs(x.numerator) + x.denominator == h:
                    level.add(x)
        out.extend(sorted(level))
    return out


def test_rational_enumeration_matches_brute_force():
    expected = _brute_rationals(12)
    gen = rationals()
    got = [next(gen) for _ in expected]
    assert got == expected
    assert got[:7] == [0, -1, 1, -2, Fraction(-1, 2), Fraction(1, 2), 2]


def test_rational_list_is_injective_prefix():
    vals = [RATIONALS[i] for i in range(500)]
    assert len(set(vals)) == 500


def test_wire_format():
    assert format_rational(Fraction(-3, 6)) == "-1/2"
    assert format_rational(4) == "4/1"
    assert parse_rational("-1/2") == Fraction(-1, 2)
    assert parse_rational("7") == 7
    assert parse_rational("3/006") == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("")


@given(st.fractions())
def test_wire_roundtrip(x):
    assert parse_rational(format_rational(x)) == x


def test_coercion_refuses_floats():
    assert Q("2/4") == Fraction(1, 2)
    with pytest.raises(TypeError):
        Q(0.5)


def test_pow2_and_clamp():
    assert pow2(3) == 8 and pow2(-3) == Fraction(1, 8) and pow2(0) == 1
    assert clamp(Fraction(5), 0, 1) == 1 and clamp(Fraction(-1), 0, 1) == 0

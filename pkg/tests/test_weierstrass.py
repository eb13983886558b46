import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from realstreams.exactnum import pow2
from realstreams.machine import apply
from realstreams.names import FAST, Name, constant
from realstreams.weierstrass import (Level, RationalPolynomial, SlowEnumeration,
                                     StabilizingStream, SyntheticRow, WeierstrassName, X,
                                     bernstein, bernstein_error_bound, bernstein_name,
                                     constant_name, fastsub_extract, fastsub_stream,
                                     from_changes, hat, limitlemma_read, limitlemma_wrap,
                                     load_polynomial, nonnegative_on_unit, norm_at_most, pulse_construct,
                                     pulse_value, sup_norm_bounds, weier_eval_prime)

from conftest import random_rationals

coeff = st.fractions(min_value=-3, max_value=3, max_denominator=8)
polys = st.lists(coeff, max_size=5).map(RationalPolynomial)


# -- polynomials ----------------------------------------------------------------------

def test_polynomial_arithmetic():
    P = X * X - X
    assert P.coeffs == (0, -1, 1)
    assert P(Fraction(1, 2)) == Fraction(-1, 4)
    assert P.derivative() == X * 2 - RationalPolynomial([1])
    assert (P - P) == RationalPolynomial() and RationalPolynomial([0, 0]).degree == -1
    assert load_polynomial('["1/2", "0", "3"]') == RationalPolynomial(["1/2", 0, 3])
    assert RationalPolynomial.from_json(P.to_json()) == P


@settings(max_examples=40, deadline=None)
@given(polys, polys, st.fractions(min_value=-2, max_value=2, max_denominator=16))
def test_ring_laws_pointwise(P, R, x):
    assert (P + R)(x) == P(x) + R(x)
    assert (P * R)(x) == P(x) * R(x)
    assert (P - R)(x) == P(x) - R(x)


# -- sup norm brackets -----------------------------------------------------------------

def test_known_brackets():
    assert sup_norm_bounds(X * X - X, 6) == (Fraction(1, 4), Fraction(67, 256))
    assert sup_norm_bounds(X * X - X, 10) == (Fraction(1, 4), Fraction(1027, 4096))
    assert sup_norm_bounds(RationalPolynomial(), 5) == (0, 0)
    assert sup_norm_bounds(X, 4) == (1, Fraction(17, 16))


@settings(max_examples=40, deadline=None)
@given(polys, st.integers(0, 8), st.randoms(use_true_random=False))
def test_bracket_properties(P, k, rnd):
    lo, hi = sup_norm_bounds(P, k)
    assert lo <= hi and hi - lo <= pow2(-k)
    # lo is attained on a dyadic grid point, hi bounds every point
    for _ in range(20):
        x = Fraction(rnd.randint(0, 1000), 1000)
        assert abs(P(x)) <= hi
    lo2, hi2 = sup_norm_bounds(P, k + 3)
    assert lo <= lo2 and hi2 <= hi


def test_norm_at_most_exact():
    P = X * X - X
    assert norm_at_most(P, Fraction(1, 4))
    assert not norm_at_most(P, Fraction(1, 4) - Fraction(1, 10 ** 12))
    # X - X^3 peaks at 2/(3 sqrt 3) = 0.3849001794...
    Q3 = X - X * X * X
    assert norm_at_most(Q3, Fraction(3849002, 10 ** 7))
    assert not norm_at_most(Q3, Fraction(3849001, 10 ** 7))
    # double root inside: 4 (X - 1/2)^2 touches 0 and peaks at the ends
    D = (X - RationalPolynomial([Fraction(1, 2)])) * (X - RationalPolynomial([Fraction(1, 2)])) * 4
    assert nonnegative_on_unit(D) and not nonnegative_on_unit(D - RationalPolynomial([Fraction(1, 10 ** 6)]))
    assert norm_at_most(D, 1) and not norm_at_most(D, Fraction(99, 100))


@settings(max_examples=60, deadline=None)
@given(polys, st.integers(0, 8))
def test_norm_at_most_agrees_with_brackets(P, k):
    lo, hi = sup_norm_bounds(P, k)
    assert norm_at_most(P, hi)
    if lo > 0:
        assert not norm_at_most(P, lo - Fraction(1, 10 ** 9))


# -- evaluation of limit names ------------------------------------------------------------------

def _bernstein_at(f, n, x):
    # independent oracle: the Bernstein sum evaluated pointwise
    return sum(f(Fraction(k, n)) * comb(n, k) * x ** k * (1 - x) ** (n - k) for k in range(n + 1))


def test_bernstein_exact_value():
    assert bernstein(hat, 8)(Fraction(1, 2)) == Fraction(93, 128)
    assert bernstein(hat, 0) == RationalPolynomial()


def test_weier_eval_exact_on_random_points():
    fname = bernstein_name(hat)
    for x in random_rationals(50, 0, 1, seed=11, max_den=64):
        out = weier_eval_prime(fname, constant(x, FAST(1))).prefix(6)
        assert out == [_bernstein_at(hat, n + 1, x) for n in range(6)]


def test_weier_eval_of_moving_input():
    P = X * X
    fname = constant_name(P, Level.FAST)
    name = Name(lambda n: Fraction(1, 3) + pow2(-n), FAST(1))
    out = weier_eval_prime(fname, name).prefix(10)
    assert out == [(Fraction(1, 3) + pow2(-n)) ** 2 for n in range(10)]
    with pytest.raises(ValueError):
        weier_eval_prime(constant_name(P, Level.DOUBLE), name)


@pytest.mark.parametrize("n", [1, 4, 9, 16, 25])
def test_bernstein_hat_error_bound(n):
    B = bernstein(hat, n)
    bound = bernstein_error_bound(2, n)
    assert all(abs(B(Fraction(i, 64)) - hat(Fraction(i, 64))) <= bound for i in range(65))


def test_double_name_indexing():
    from realstreams.exactnum import tuple_pair
    W = WeierstrassName(Level.DOUBLE, lambda i, j: RationalPolynomial([i, j]))
    assert W[tuple_pair(2, 3)] == RationalPolynomial([2, 3])
    assert len(W.prefix_json(4)) == 4


# -- stabilizing streams --------------------------------------------------------------------

def test_from_changes():
    s = from_changes(0, {2: 1, 5: 0})
    assert [s(0, t) for t in range(8)] == [0, 0, 1, 1, 1, 0, 0, 0]
    assert s.last_change(0, 20) == 5 and s.mind_changes(0, 20) == 2
    assert s.settle(0) == 5


def test_limitlemma_wrap_forms():
    seq = limitlemma_wrap([3, 1, 4, 4, 4])
    assert limitlemma_read(seq, 7, 2) == 4 and seq.mind_changes(0, 4) == 2
    one = limitlemma_wrap(lambda s: min(s, 3))
    assert one(0, 10) == 3 and one.last_change(0, 10) == 3
    two = limitlemma_wrap(lambda n, s: n if s > n else -1)
    assert two(4, 5) == 4 and two.last_change(4, 9) == 5
    assert isinstance(two, StabilizingStream)


# -- fast subsequences -------------------------------------------------------------------

def _rows(count, seed):
    rnd = random.Random(seed)
    out = []
    for _ in range(count):
        base = RationalPolynomial([Fraction(rnd.randint(-8, 8), 8) for _ in range(3)])
        n = rnd.randint(0, 5)
        settle = rnd.randint(0, 12)
        out.append((SyntheticRow(base, n, settle), n, settle))
    return out


@pytest.mark.parametrize("row,n,settle", _rows(20, 2024))
def test_fastsub_finds_settle(row, n, settle):
    H = 16
    stages = fastsub_extract(lambda i, m: row(m), n, H)
    assert stages == sorted(stages)
    assert stages[-1] == settle
    # a four times longer horizon does not move the candidate
    assert fastsub_extract(lambda i, m: row(m), n, 4 * H)[-1] == settle


def test_alternating_row_stabilizes_after_perturbation():
    # rows alternate perturbed / base from m = 0 and become constant at 5
    P = X * X
    row = lambda n, m: P + X * pow2(-n) * 2 if m < 5 and m % 2 == 0 else P
    stream = fastsub_stream(row)
    assert stream(1, 12) == 5 and stream.last_change(1, 12) == 5


def test_fastsub_of_constant_row():
    assert fastsub_extract(lambda n, m: X, 3, 10) == [0] * 11


# -- pulses ---------------------------------------------------------------------------------

def _pulse_oracle(h, x, depth):
    total = Fraction(0)
    for m in range(1, depth + 1):
        t = 2 ** m * x - 1
        if 0 < t < 1:
            total += Fraction(1, 2 ** h(m)) * (1 - abs(2 * t - 1))
    return total


def test_pulse_known_values():
    ident = SlowEnumeration(lambda m: m)
    assert pulse_value(ident, Fraction(3, 4), 5) == Fraction(1, 2)
    assert pulse_value(ident, Fraction(3, 8), 5) == Fraction(1, 4)
    assert pulse_value(ident, 0, 5) == 0 and pulse_value(ident, 1, 5) == 0


@pytest.mark.parametrize("depth", [1, 4, 8, 12])
def test_pulse_closed_form(depth):
    h = SlowEnumeration(lambda m: (3 * m + 1) % 17)
    ev, _ = pulse_construct(h, depth)
    for x in random_rationals(100, 0, 1, seed=depth, max_den=2 ** 14):
        assert ev.exact(x) == _pulse_oracle(h, x, depth)


def test_pulse_transformer_uses_known_coefficients():
    h = SlowEnumeration(lambda m: m, delay=lambda m: 2 * m)
    _, t = pulse_construct(h, 12)
    x = Fraction(3, 16)          # support of the m = 3 term
    out = apply(t, constant(x, FAST(1))).prefix(10)
    assert out[:6] == [0] * 6
    assert out[6:] == [_pulse_oracle(h, x, 12)] * 4

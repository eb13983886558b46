import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from realstreams.exactnum import pow2, tuple_pair
from realstreams.names import (BINARY, FAST, HOTZ, LIMINF, LIMINF_STRICT, LOWER, UPPER,
                               Consistent, Kind, Name, NameExhausted, NameFileError,
                               NotCheckable, PairTag, ReprTag, Schedule, SyntheticSpec,
                               UnsupportedSynthetic, ViolatedAt, check_consistency, constant,
                               dump_name_file, interleave, load_name_file, make_synthetic)

small = st.fractions(min_value=-2, max_value=2, max_denominator=64)


def test_tags():
    assert str(FAST(0)) == "FAST(0)" and str(HOTZ) == "HOTZ"
    assert FAST(2).arity == 2 and FAST(0).arity == 1 and LOWER(1).arity == 2
    assert ReprTag.from_json(LOWER(1).to_json()) == LOWER(1)
    with pytest.raises(ValueError):
        ReprTag(Kind.FAST)
    with pytest.raises(ValueError):
        ReprTag(Kind.HOTZ, 1)
    assert str(PairTag(LOWER(0), UPPER(0))) == "LOWER(0)+UPPER(0)"


def test_name_memoizes_in_order():
    calls = []

    def produce(i):
        calls.append(i)
        return i * i

    n = Name(produce, FAST(0))
    assert n[3] == 9
    assert n[1] == 1
    assert calls == [0, 1, 2, 3]
    assert n.prefix(5) == [0, 1, 4, 9, 16]
    assert n.computed() == 5


def test_name_is_thread_safe():
    calls = []
    n = Name(lambda i: calls.append(i) or i, FAST(0))
    threads = [threading.Thread(target=lambda: n[200]) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert calls == list(range(201))


def test_finite_names():
    n = Name.from_values([1, 2], LOWER(0))
    assert n.prefix(2) == [1, 2]
    with pytest.raises(NameExhausted):
        n[2]
    padded = Name.from_values([1, 2], LOWER(0), pad_last=True)
    assert padded[10] == 2


def test_multi_index_access():
    n = Name.from_tuple_function(lambda i, j: 10 * i + j, LOWER(1))
    assert n.at(2, 3) == 23
    assert n[tuple_pair(4, 1)] == 41


def test_interleave_and_retag():
    a = constant(1, LOWER(0))
    b = constant(2, UPPER(0))
    both = interleave(a, b)
    assert both.prefix(4) == [1, 2, 1, 2]
    assert both.tag == PairTag(LOWER(0), UPPER(0))
    assert a.retag(FAST(1)).tag == FAST(1)


@settings(max_examples=40, deadline=None)
@given(small, st.sampled_from(["exact", "above", "below", "alternate", "random"]),
       st.integers(0, 100))
def test_synthetic_fast_is_fast(x, approach, seed):
    name = make_synthetic(SyntheticSpec(x, FAST(0), Schedule(approach, seed=seed)))
    vals = name.prefix(24)
    assert all(abs(q - x) <= pow2(-n) for n, q in enumerate(vals))
    assert check_consistency(FAST(0), vals).ok


@settings(max_examples=30, deadline=None)
@given(small, st.integers(0, 10), st.integers(0, 50))
def test_synthetic_lower0_sup(x, settle, seed):
    name = make_synthetic(SyntheticSpec(x, LOWER(0), Schedule("random", settle=settle, seed=seed)))
    vals = name.prefix(settle + 5)
    assert all(q <= x for q in vals)
    assert vals[settle] == x
    upper = make_synthetic(SyntheticSpec(x, UPPER(0), Schedule("random", settle=settle, seed=seed)))
    uvals = upper.prefix(settle + 5)
    assert all(q >= x for q in uvals) and uvals[settle] == x


@settings(max_examples=30, deadline=None)
@given(small, st.integers(0, 6), st.integers(0, 4), st.integers(0, 2))
def test_synthetic_lower1_rows(x, settle, delay, growth):
    spec = SyntheticSpec(x, LOWER(1), Schedule("random", settle=settle, row_delay=delay,
                                               row_growth=growth))
    name = make_synthetic(spec)
    for i in range(settle + 3):
        row = [name.at(i, j) for j in range(spec.delay(i) + 4)]
        inf = min(row)
        assert inf == (x if i >= settle else x - pow2(-i))
        assert row[-1] == inf


def test_synthetic_junk_far_away():
    spec = SyntheticSpec(Fraction(1, 3), HOTZ, Schedule("above", junk=4, seed=3))
    vals = make_synthetic(spec).prefix(20)
    assert all(abs(v - Fraction(1, 3)) >= 8 for v in vals[:4])
    assert all(abs(v - Fraction(1, 3)) <= pow2(-n) for n, v in enumerate(vals) if n >= 4)
    assert not check_consistency(HOTZ, vals, 0).ok
    assert check_consistency(HOTZ, vals, {"N": 4}).ok
    assert spec.horizon() == {"N": 4}


def test_synthetic_liminf():
    x = Fraction(1, 2)
    name = make_synthetic(SyntheticSpec(x, LIMINF, Schedule("above")))
    assert name.prefix(4) == [x + 1, x + 1, x + Fraction(1, 4), x + 1]
    strict = make_synthetic(SyntheticSpec(x, LIMINF_STRICT, Schedule("above")))
    assert strict[2] == x - Fraction(1, 4)
    assert make_synthetic(SyntheticSpec(x, LIMINF, Schedule("exact")))[7] == x


def test_synthetic_binary():
    third = make_synthetic(SyntheticSpec(Fraction(1, 3), BINARY)).prefix(9)
    assert third == [0, 0, 1, 0, 1, 0, 1, 0, 1]
    one = make_synthetic(SyntheticSpec(1, BINARY)).prefix(5)
    assert one == [1, 0, 0, 0, 0]
    one_low = make_synthetic(SyntheticSpec(1, BINARY, Schedule("below"))).prefix(5)
    assert one_low == [0, 1, 1, 1, 1]
    with pytest.raises(UnsupportedSynthetic):
        make_synthetic(SyntheticSpec(3, BINARY))


def test_unsupported_synthetics():
    with pytest.raises(UnsupportedSynthetic):
        make_synthetic(SyntheticSpec(0, FAST(0), Schedule(junk=2)))
    with pytest.raises(UnsupportedSynthetic):
        make_synthetic(SyntheticSpec(0, LOWER(2)))


def test_schedule_validation_and_json():
    with pytest.raises(ValueError):
        Schedule("sideways")
    with pytest.raises(ValueError):
        Schedule(junk=-1)
    spec = SyntheticSpec(Fraction(2, 7), LOWER(1), Schedule("random", junk=0, settle=3, seed=9))
    assert SyntheticSpec.from_json(spec.to_json()) == spec


def test_consistency_checks():
    assert check_consistency(FAST(0), [0, Fraction(1, 2), Fraction(1, 4)]) == Consistent()
    assert check_consistency(FAST(0), [0, 1, 0]) == ViolatedAt(1, 2)
    assert check_consistency(FAST(0), [0, 2]) == ViolatedAt(0, 1)
    assert check_consistency(BINARY, [0, 1, 2]) == ViolatedAt(2, 2)
    assert isinstance(check_consistency(LOWER(0), [5, -5]), NotCheckable)


def test_name_file_roundtrip():
    text = dump_name_file([Fraction(1, 3), 2], LOWER(1), {"k": 1})
    assert text.splitlines()[0] == '{"level": 1, "params": {"k": 1}, "tag": "LOWER"}'
    tag, params, values = load_name_file(text)
    assert tag == LOWER(1) and params == {"k": 1} and values == [Fraction(1, 3), 2]
    with pytest.raises(NameFileError):
        load_name_file("")
    with pytest.raises(NameFileError):
        load_name_file('{"tag": "FAST", "level": 0}\nnot-a-number\n')

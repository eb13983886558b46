import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from realstreams.exactnum import pow2
from realstreams.machine import (ABORT, INTERNAL, READ, Emit, ExternalTransformer, Guess,
                                 Indexwise, InputFailure, MachineError, Program,
                                 ProtocolError, StepMachine, Trace, apply, compose, identity,
                                 pointwise, run, run_external)
from realstreams.names import FAST, LOWER, Name, NameExhausted, TagMismatch, constant

DEMOS = Path(__file__).resolve().parent.parent / "demos"
halves = Name(lambda n: pow2(-n), FAST(0), "halves")


def test_identity_trace():
    t = run(identity(FAST(0)), halves, max_emits=3)
    assert t.emitted == [1, Fraction(1, 2), Fraction(1, 4)]
    assert t.read_at_emit == [1, 2, 3]
    assert t.reads == 3 and t.steps == 6
    assert not t.halted


def test_run_needs_budget():
    with pytest.raises(ValueError):
        run(identity(), halves)


def test_step_budget_counts_every_action():
    def body():
        while True:
            yield INTERNAL
            yield READ
    t = run(Program(body), halves, max_steps=7)
    assert t.steps == 7 and t.reads == 3 and t.emitted == []


def test_halt_and_abort():
    def halting():
        yield Emit(1)
    t = run(Program(halting), halves, max_steps=10)
    assert t.halted and not t.aborted and t.emitted == [1]

    def aborting():
        yield READ
        yield ABORT
    t = run(Program(aborting), halves, max_steps=10)
    assert t.aborted and t.halted and t.reads == 1


def test_stop_callback_ends_run_at_emit():
    t = run(identity(), halves, max_steps=100, stop=lambda i, v: v < Fraction(1, 5))
    assert t.emitted[-1] == Fraction(1, 8) and len(t.emitted) == 4


def test_guess_is_refused_by_deterministic_run():
    def body():
        yield Guess(2)
    with pytest.raises(MachineError):
        run(Program(body), halves, max_steps=5)
    with pytest.raises(ValueError):
        Guess(1)


def test_input_failure_keeps_trace():
    short = Name.from_values([1, 2], FAST(0))
    with pytest.raises(InputFailure) as err:
        run(identity(), short, max_emits=5)
    assert err.value.trace.emitted == [1, 2]


def test_step_machine_counter():
    # emits the running sum of the input
    def step(state, reply):
        phase, total = state
        if phase == "read":
            return READ, ("add", total)
        if phase == "add":
            total += reply
            return Emit(total), ("read", total)
    m = StepMachine(("read", 0), step, FAST(0), FAST(0))
    t = run(m, constant(2, FAST(0)), max_emits=3)
    assert t.emitted == [2, 4, 6]


def test_indexwise_reads_on_demand():
    t = run(Indexwise(lambda v, n, c: v[2 * n]), halves, max_emits=3)
    assert t.emitted == [1, Fraction(1, 4), Fraction(1, 16)]
    assert t.read_at_emit == [1, 3, 5]


def test_apply_is_lazy_and_shared():
    out = apply(pointwise(lambda q, n: q + n), halves)
    assert out[2] == 2 + Fraction(1, 4)
    assert out.computed() == 3


def test_apply_exhaustion():
    def one():
        yield Emit(0)
    out = apply(Program(one), halves)
    assert out[0] == 0
    with pytest.raises(NameExhausted):
        out[1]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(max_denominator=50), min_size=6, max_size=6))
def test_compose_is_sequential_application(values):
    double = pointwise(lambda q, n: 2 * q, FAST(0), FAST(0))
    shift = pointwise(lambda q, n: q + 1, FAST(0), FAST(0))
    name = Name.from_values(values, FAST(0))
    got = run(compose(double, shift), name, max_emits=6).emitted
    assert got == [2 * v + 1 for v in values]


def test_compose_checks_tags():
    with pytest.raises(TagMismatch):
        compose(identity(LOWER(0)), identity(FAST(0)))
    assert compose(identity(None), identity(FAST(0))).in_tag is None


def test_trace_json_roundtrip():
    t = run(identity(), halves, max_emits=2)
    assert Trace.from_json(t.to_json()) == t


def _script(tmp_path, text):
    p = tmp_path / "m.py"
    p.write_text(text)
    return [sys.executable, str(p)]


def test_external_threshold_machine():
    argv = [sys.executable, str(DEMOS / "external_threshold.py")]
    t = run_external(argv, halves, max_emits=3)
    assert t.emitted == [0, 0, 0]
    assert t.reads == 6
    assert t.transcript[:2] == ["> READ", "< 1/1"]
    assert t.transcript[-1] == "> EMIT 0/1"


def test_external_protocol_errors(tmp_path):
    bad = _script(tmp_path, "print('HELLO', flush=True)\n")
    with pytest.raises(ProtocolError):
        run(ExternalTransformer(bad), halves, max_steps=3)
    silent = _script(tmp_path, "pass\n")
    with pytest.raises(ProtocolError):
        run(ExternalTransformer(silent), halves, max_steps=3)
    float_emit = _script(tmp_path, "print('EMIT 0.5', flush=True)\n")
    with pytest.raises(ProtocolError):
        run(ExternalTransformer(float_emit), halves, max_steps=3)

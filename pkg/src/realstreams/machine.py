"""Stream machines: one-way transformers with observable reads and emits.

A transformer is started into an execution.  The execution is driven by
``advance(reply)`` which returns the next action:

    Read        consume the next input rational (reply = that rational)
    Emit(v)     append v to the output
    Internal    one step of private work
    Guess(k)    nondeterministic branch, reply = choice in range(k)
    Abort       withdraw this computation path

Each action is one step.  The reply to a Read or Guess is passed to the
following ``advance`` call; otherwise the reply is None.

Two ways to write a machine: ``Program`` wraps a generator function that
yields actions (``x = yield READ``), and ``StepMachine`` wraps an explicit
state plus a pure step function.  ``Indexwise`` covers the common case of
an output entry that is a function of finitely many input entries.
"""

import re
import subprocess
from dataclasses import dataclass, field

from .exactnum import Q, format_rational, parse_rational
from .names import Name, NameExhausted, TagMismatch


# -- actions -------------------------------------------------------------------

class Action:
    __slots__ = ()


class _Read(Action):
    def __repr__(self):
        return "Read"


class _Internal(Action):
    def __repr__(self):
        return "Internal"


class _Abort(Action):
    def __repr__(self):
        return "Abort"


READ = _Read()
INTERNAL = _Internal()
ABORT = _Abort()


@dataclass(frozen=True)
class Emit(Action):
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", Q(self.value))


@dataclass(frozen=True)
class Guess(Action):
    arity: int

    def __post_init__(self):
        if self.arity < 2:
            raise ValueError("a guess needs at least two branches")


class MachineError(RuntimeError):
    pass


class ProtocolError(MachineError):
    """An external machine broke the wire protocol."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else "%s: %r" % (message, line))
        self.line = line


class InputFailure(MachineError):
    """The input name could not supply an entry.  Carries the partial trace."""

    def __init__(self, cause, trace):
        super().__init__("input failed after %d reads: %s" % (trace.reads, cause))
        self.cause = cause
        self.trace = trace


class BudgetExceeded(MachineError):
    pass


# -- transformers ----------------------------------------------------------------

class Transformer:
    """Base class.  Subclasses implement ``start``."""

    in_tag = None
    out_tag = None
    label = "transformer"

    def start(self):
        raise NotImplementedError

    def __repr__(self):
        return "<%s %s: %s -> %s>" % (type(self).__name__, self.label, self.in_tag, self.out_tag)


class Execution:
    def advance(self, reply=None):
        raise NotImplementedError

    def close(self):
        pass


class _GeneratorExecution(Execution):
    def __init__(self, gen):
        self._gen = gen
        self._started = False
        self.finished = False

    def advance(self, reply=None):
        if self.finished:
            return None
        try:
            if not self._started:
                self._started = True
                action = next(self._gen)
            else:
                action = self._gen.send(reply)
        except StopIteration:
            self.finished = True
            return None
        if not isinstance(action, Action):
            raise MachineError("machine yielded a non-action: %r" % (action,))
        return action

    def close(self):
        self._gen.close()


class Program(Transformer):
    """Transformer from a generator function ``body(*args)`` yielding actions."""

    def __init__(self, body, in_tag=None, out_tag=None, label=None, args=()):
        self.body = body
        self.args = tuple(args)
        self.in_tag = in_tag
        self.out_tag = out_tag
        self.label = label or getattr(body, "__name__", "program")

    def start(self):
        return _GeneratorExecution(self.body(*self.args))


class _StepExecution(Execution):
    def __init__(self, machine):
        self._m = machine
        self._state = machine.initial

    def advance(self, reply=None):
        if self._state is None:
            return None
        action, self._state = self._m.step(self._state, reply)
        return action


class StepMachine(Transformer):
    """Explicit state machine.  ``step(state, reply) -> (action, next_state)``.

    Returning a next state of None halts the machine after that action.
    """

    def __init__(self, initial, step, in_tag=None, out_tag=None, label="step machine"):
        self.initial = initial
        self.step = step
        self.in_tag = in_tag
        self.out_tag = out_tag
        self.label = label

    def start(self):
        return _StepExecution(self)


class NeedInput(Exception):
    def __init__(self, index):
        self.index = index


class TapeView:
    """Read-only view of the consumed input.  Asking for an unread entry
    raises NeedInput, which Indexwise answers by reading up to it."""

    def __init__(self, buf):
        self._buf = buf

    def __getitem__(self, k):
        if k >= len(self._buf):
            raise NeedInput(k)
        return self._buf[k]

    def __len__(self):
        return len(self._buf)


class Tape:
    """Buffer of the one-way input for generator programs."""

    def __init__(self):
        self.buf = []

    def upto(self, k):
        while len(self.buf) <= k:
            self.buf.append((yield READ))

    def next(self):
        v = yield READ
        self.buf.append(v)
        return v

    def __getitem__(self, k):
        return self.buf[k]

    def __len__(self):
        return len(self.buf)


def _indexwise_body(fn, start_index):
    tape = Tape()
    view = TapeView(tape.buf)
    cache = {}
    n = start_index
    while True:
        try:
            v = fn(view, n, cache)
        except NeedInput as need:
            yield from tape.upto(need.index)
            continue
        yield Emit(v)
        n += 1


class Indexwise(Program):
    """Output entry n is ``fn(view, n, cache)``.

    fn indexes the input through ``view``; missing entries are read on
    demand, then fn is called again.  ``cache`` is a per-execution dict
    for memoizing pure intermediate values across calls.
    """

    def __init__(self, fn, in_tag=None, out_tag=None, label=None):
        super().__init__(_indexwise_body, in_tag, out_tag,
                         label or getattr(fn, "__name__", "indexwise"), (fn, 0))
        self.fn = fn


def pointwise(fn, in_tag=None, out_tag=None, label=None):
    """p_n = fn(q_n, n)."""
    return Indexwise(lambda view, n, cache: fn(view[n], n), in_tag, out_tag,
                     label or getattr(fn, "__name__", "pointwise"))


def identity(tag=None):
    return pointwise(lambda q, n: q, tag, tag, "identity")


# -- running -----------------------------------------------------------------------

@dataclass
class Trace:
    emitted: list = field(default_factory=list)
    reads: int = 0
    read_at_emit: list = field(default_factory=list)
    steps: int = 0
    halted: bool = False
    aborted: bool = False
    transcript: list = None

    def to_json(self):
        out = {
            "emitted": [format_rational(v) for v in self.emitted],
            "reads": self.reads,
            "read_at_emit": list(self.read_at_emit),
            "steps": self.steps,
            "halted": self.halted,
            "aborted": self.aborted,
        }
        if self.transcript is not None:
            out["transcript"] = list(self.transcript)
        return out

    @classmethod
    def from_json(cls, obj):
        return cls([parse_rational(v) for v in obj["emitted"]], obj["reads"],
                   list(obj["read_at_emit"]), obj["steps"], obj.get("halted", False),
                   obj.get("aborted", False), obj.get("transcript"))


def run(t, name, max_steps=None, max_emits=None, stop=None):
    """Run ``t`` on ``name`` until a budget runs out or the machine stops.

    ``stop(index, value)`` may end the run right after an emit.
    Deterministic machines only: a Guess raises MachineError.
    """
    if max_steps is None and max_emits is None:
        raise ValueError("a finite budget is required")
    trace = Trace()
    ex = t.start()
    reply = None
    try:
        while True:
            if max_steps is not None and trace.steps >= max_steps:
                break
            if max_emits is not None and len(trace.emitted) >= max_emits:
                break
            action = ex.advance(reply)
            reply = None
            if action is None:
                trace.halted = True
                break
            trace.steps += 1
            if action is READ:
                try:
                    reply = name[trace.reads]
                except (NameExhausted, IndexError, ArithmeticError, ValueError) as err:
                    trace.steps -= 1
                    raise InputFailure(err, trace) from err
                trace.reads += 1
            elif isinstance(action, Emit):
                trace.emitted.append(action.value)
                trace.read_at_emit.append(trace.reads)
                if stop is not None and stop(len(trace.emitted) - 1, action.value):
                    break
            elif action is ABORT:
                trace.aborted = True
                trace.halted = True
                break
            elif isinstance(action, Guess):
                raise MachineError("guess in a deterministic run; use nondet.simulate")
    finally:
        transcript = getattr(ex, "transcript", None)
        if transcript is not None:
            trace.transcript = list(transcript)
        ex.close()
    return trace


def apply(t, name, max_steps_per_emit=None, tag=None, label=None):
    """The output of ``t`` on ``name`` as a lazy Name.

    Entries are produced by driving one shared execution, so reading entry
    n costs the steps up to the n-th emit once.  A halting or aborting
    machine makes later entries raise NameExhausted.
    """
    state = {"ex": None, "reply": None, "reads": 0}

    def produce(n):
        if state["ex"] is None:
            state["ex"] = t.start()
        ex = state["ex"]
        steps = 0
        while True:
            if max_steps_per_emit is not None and steps >= max_steps_per_emit:
                raise BudgetExceeded("no emit within %d steps at output %d"
                                     % (max_steps_per_emit, n))
            action = ex.advance(state["reply"])
            state["reply"] = None
            steps += 1
            if action is None or action is ABORT:
                raise NameExhausted("machine stopped before output %d" % n)
            if action is READ:
                state["reply"] = name[state["reads"]]
                state["reads"] += 1
            elif isinstance(action, Emit):
                return action.value
            elif isinstance(action, Guess):
                raise MachineError("guess in a deterministic apply")

    return Name(produce, tag if tag is not None else t.out_tag,
                label or "%s(%s)" % (t.label, name.label))


# -- composition ---------------------------------------------------------------------

def _tags_compatible(out_tag, in_tag):
    return out_tag is None or in_tag is None or out_tag == in_tag


def _compose_body(t1, t2):
    ex1 = t1.start()
    ex2 = t2.start()
    reply2 = None
    reply1 = None
    try:
        while True:
            a2 = ex2.advance(reply2)
            reply2 = None
            if a2 is None:
                return
            if a2 is READ:
                # serve t2's read by running t1 to its next emit
                while True:
                    a1 = ex1.advance(reply1)
                    reply1 = None
                    if a1 is None:
                        return
                    if a1 is READ:
                        reply1 = yield READ
                    elif isinstance(a1, Guess):
                        reply1 = yield a1
                    elif a1 is ABORT:
                        yield ABORT
                        return
                    elif isinstance(a1, Emit):
                        reply2 = a1.value
                        yield INTERNAL
                        break
                    else:
                        yield INTERNAL
            elif isinstance(a2, Guess):
                reply2 = yield a2
            else:
                yield a2
                if a2 is ABORT:
                    return
    finally:
        ex1.close()
        ex2.close()


def compose(t1, t2):
    """Pipeline t1 then t2.  Output tags of t1 must match input tags of t2."""
    if not _tags_compatible(t1.out_tag, t2.in_tag):
        raise TagMismatch("cannot feed %s output into %s input" % (t1.out_tag, t2.in_tag))
    in_tag = t1.in_tag
    out_tag = t2.out_tag
    return Program(_compose_body, in_tag, out_tag, "%s;%s" % (t1.label, t2.label), (t1, t2))


# -- external machines ---------------------------------------------------------------------

_WIRE_RATIONAL = re.compile(r"-?[0-9]+/0*[1-9][0-9]*")


class _ExternalExecution(Execution):
    def __init__(self, argv):
        self.transcript = []
        self._proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                      stderr=subprocess.DEVNULL, text=True, bufsize=1)
        self._pending_read = False

    def advance(self, reply=None):
        proc = self._proc
        if self._pending_read:
            line = format_rational(reply)
            self.transcript.append("< " + line)
            try:
                proc.stdin.write(line + "\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError, ValueError) as err:
                raise ProtocolError("machine closed its input") from err
            self._pending_read = False
        line = proc.stdout.readline()
        if not line:
            raise ProtocolError("unexpected end of output")
        if not line.endswith("\n"):
            raise ProtocolError("unterminated line", line)
        body = line[:-1]
        self.transcript.append("> " + body)
        if body == "READ":
            self._pending_read = True
            return READ
        if body.startswith("EMIT "):
            text = body[5:]
            if not _WIRE_RATIONAL.fullmatch(text):
                raise ProtocolError("bad rational", line)
            return Emit(parse_rational(text))
        raise ProtocolError("unexpected line", line)

    def close(self):
        proc = self._proc
        if proc.poll() is None:
            proc.kill()
        proc.wait()
        for stream in (proc.stdin, proc.stdout):
            try:
                stream.close()
            except (BrokenPipeError, OSError):
                pass


class ExternalTransformer(Transformer):
    """A subprocess speaking the line protocol.

    Machine to harness: ``READ`` or ``EMIT p/q``.  After READ the harness
    answers with one ``p/q`` line.  Anything else, or end of output, is a
    ProtocolError.
    """

    def __init__(self, argv, in_tag=None, out_tag=None):
        self.argv = list(argv)
        self.in_tag = in_tag
        self.out_tag = out_tag
        self.label = "external:" + " ".join(self.argv)

    def start(self):
        return _ExternalExecution(self.argv)


def run_external(argv, name, max_steps=None, max_emits=None):
    return run(ExternalTransformer(argv), name, max_steps, max_emits)

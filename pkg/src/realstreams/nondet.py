"""Nondeterministic machines and a bounded simulator.

A nondeterministic machine yields ``Guess(k)`` to branch and ``ABORT``
to withdraw a path.  ``simulate`` explores the guess tree breadth first
(by number of guesses, lexicographic within a level) by replaying each
choice list from the start.  Infinite runs cannot be finished, so a path
that reaches the horizon is reported as alive at the budget, never as
accepted.  The horizon is ``target_emits`` emits (checked at the next
guess) if given, otherwise a guess beyond ``max_depth`` or
``max_steps_per_path`` steps.
"""

from collections import deque
from dataclasses import dataclass, field

from .exactnum import ONE, ZERO, format_rational, pow2, tuple_pair, tuple_unpair
from .machine import ABORT, INTERNAL, READ, Emit, Guess, Program, Tape, Trace
from .names import BINARY, FAST, NameExhausted


ALIVE = "alive-at-budget"


@dataclass
class GuessPath:
    choices: tuple
    status: str           # ALIVE, "aborted", "halted" or "exhausted"
    step: int = None      # step of the abort or halt
    reason: str = None    # for ALIVE: which horizon was reached

    def to_json(self):
        return {"choices": list(self.choices), "status": self.status,
                "step": self.step, "reason": self.reason}


@dataclass
class NondetResult:
    surviving: list = field(default_factory=list)   # (GuessPath, Trace)
    explored: int = 0
    aborted: int = 0
    halted: int = 0
    exhausted: int = 0
    truncated: bool = False

    def to_json(self):
        return {
            "surviving": [{"path": p.to_json(), "trace": t.to_json()} for p, t in self.surviving],
            "explored": self.explored,
            "aborted": self.aborted,
            "halted": self.halted,
            "exhausted": self.exhausted,
            "truncated": self.truncated,
        }


def _replay(m, name, choices, max_depth, max_steps, target_emits):
    """Run one path.  Returns (outcome, trace, arity) where outcome is
    "branch" when the machine asks for a guess beyond ``choices``."""
    trace = Trace()
    ex = m.start()
    reply = None
    used = 0
    try:
        while True:
            done = target_emits is not None and len(trace.emitted) >= target_emits
            if max_steps is not None and trace.steps >= max_steps:
                return ("emits" if done else "steps"), trace, None
            action = ex.advance(reply)
            reply = None
            if action is None:
                trace.halted = True
                return "halted", trace, None
            if isinstance(action, Guess):
                if used == len(choices):
                    if done:
                        return "emits", trace, None
                    if used >= max_depth:
                        return "depth", trace, None
                    return "branch", trace, action.arity
                reply = choices[used]
                used += 1
                trace.steps += 1
                continue
            trace.steps += 1
            if action is READ:
                try:
                    reply = name[trace.reads]
                except NameExhausted:
                    trace.steps -= 1
                    return "input", trace, None
                trace.reads += 1
            elif isinstance(action, Emit):
                trace.emitted.append(action.value)
                trace.read_at_emit.append(trace.reads)
            elif action is ABORT:
                trace.aborted = True
                trace.halted = True
                return "aborted", trace, None
    finally:
        ex.close()


def simulate(m, name, max_depth=8, max_steps_per_path=10000, target_emits=None,
             max_paths=100000):
    """Breadth-first exploration of the guess tree of ``m`` on ``name``.

    With ``target_emits`` set, only paths reaching that many emits
    survive; paths running out of guesses or steps first are counted as
    exhausted.  Without it, reaching the depth or step limit counts as
    survival.  Running out of input also counts as exhausted.
    """
    result = NondetResult()
    frontier = deque([()])
    while frontier:
        if result.explored >= max_paths:
            result.truncated = True
            break
        choices = frontier.popleft()
        result.explored += 1
        outcome, trace, arity = _replay(m, name, choices, max_depth,
                                        max_steps_per_path, target_emits)
        if outcome == "branch":
            for c in range(arity):
                frontier.append(choices + (c,))
        elif outcome == "aborted":
            result.aborted += 1
        elif outcome == "halted":
            result.halted += 1
        elif outcome == "emits" or (target_emits is None and outcome in ("depth", "steps")):
            result.surviving.append((GuessPath(choices, ALIVE, trace.steps, outcome), trace))
        else:
            result.exhausted += 1
    return result


# -- fast subsequences ----------------------------------------------------------------

def _pick_row(tape, state, get_index, picks_wanted):
    """Extend the picks of one row to ``picks_wanted`` entries.

    Each pick is a sequence of binary guesses: 1 advances the candidate
    index, 0 selects it.  A selected value must satisfy
    |q_{n_k} - q_{n_l}| <= 2^(-l-1) for every earlier pick l.
    """
    picks = state["picks"]
    while len(picks) < picks_wanted:
        g = yield Guess(2)
        if g == 1:
            state["cand"] += 1
            continue
        pos = get_index(state["cand"])
        yield from tape.upto(pos)
        v = tape[pos]
        for l, pv in enumerate(picks):
            if abs(v - pv) > pow2(-l - 1):
                yield ABORT
                return False
        picks.append(v)
        state["cand"] += 1
    return True


def _fast_subsequence_body():
    tape = Tape()
    state = {"picks": [], "cand": 0}
    k = 0
    while True:
        ok = yield from _pick_row(tape, state, lambda n: n, k + 1)
        if not ok:
            return
        yield Emit(state["picks"][k])
        k += 1


def nd_fast_subsequence():
    """Guess indices n_0 < n_1 < ... of a convergent name so that the
    picked values satisfy |q_{n_k} - q_{n_l}| <= 2^(-l-1) for l < k;
    emit each pick.  Surviving outputs are fast names of the limit."""
    return Program(_fast_subsequence_body, FAST(1), FAST(0), "nd-fast-subsequence")


def _level_down_body(d):
    tape = Tape()
    k = 0
    while True:
        row = tuple_unpair(k, d)
        n = row[-1]
        state = {"picks": [], "cand": 0}
        ok = yield from _pick_row(tape, state, lambda j, r=row: tuple_pair(*r, j), n + 1)
        if not ok:
            return
        yield Emit(state["picks"][n])
        k += 1


def nd_level_down(d):
    """FAST(d+1) -> FAST(d).  Output <n_1, ..., n_d> is pick n_d of the
    fast subsequence of row (n_1, ..., n_d) of the input; for d = 0 this
    is the fast subsequence itself."""
    if d == 0:
        return nd_fast_subsequence()
    return Program(_level_down_body, FAST(d + 1), FAST(d), "nd-level-down(%d)" % d, (d,))


# -- binary expansion -------------------------------------------------------------------

def _binary_body():
    tape = Tape()
    digits = []          # constraints: (j, s_j, b) for digit j with weight 2^-j

    def violated():
        n = len(tape) - 1
        q = tape[n]
        err = pow2(-n)
        for j, s, b in digits:
            scale = pow2(j)
            if b == 0 and scale * (q - s) - scale * err > 1:
                return True
            if b == 1 and scale * (q - s) + scale * err < 1:
                return True
        return False

    s = ZERO
    j = 0
    while True:
        while len(tape) <= j + 2:
            yield from tape.next()
            if violated():
                yield ABORT
                return
        b = yield Guess(2)
        digits.append((j, s, b))
        yield Emit(ONE if b else ZERO)
        if violated():
            yield ABORT
            return
        if b:
            s += pow2(-j)
        j += 1


def nd_binary():
    """FAST(0) name of x in (0, 2) -> BINARY digits b, d_1, d_2, ...

    Digit j (weight 2^-j, j = 0 the integer digit) is guessed.  With s_j
    the value of the digits before it, digit 0 needs 2^j (x - s_j) <= 1
    and digit 1 needs 2^j (x - s_j) >= 1; a branch aborts as soon as the
    current approximation refutes one of its constraints."""
    return Program(_binary_body, FAST(0), BINARY, "nd-binary")


# -- bounded Pi_2 decision --------------------------------------------------------------

def _pi2_body(P, bound):
    x = yield READ
    x = int(x)
    universe = range(bound + 1)
    branch = yield Guess(2)
    if branch == 1:
        yield Emit(1)
        for y in universe:
            z = yield Guess(bound + 1)
            if not P(x, y, z) or any(P(x, y, w) for w in range(z)):
                yield ABORT
                return
    else:
        yield Emit(0)
        y = yield Guess(bound + 1)
        if any(P(x, y, z) for z in universe):
            yield ABORT
            return
        for w in range(y):
            if not any(P(x, w, z) for z in universe):
                yield ABORT
                return
    while True:
        yield INTERNAL


def nd_pi2_decide(P, bound):
    """Decide x in {x : for all y exists z P(x, y, z)} over y, z <= bound.

    Branch 1 emits 1, then guesses the least witness z for each y.
    Branch 0 emits 0, then guesses the least y without a witness.
    Wrong guesses abort; the verified branch idles with internal steps.
    """
    if bound < 1:
        raise ValueError("the universe needs at least two elements")
    return Program(_pi2_body, None, None, "nd-pi2", (P, bound))


def describe(result):
    """Plain-text summary of a NondetResult."""
    lines = ["explored %d, aborted %d, halted %d, exhausted %d, surviving %d"
             % (result.explored, result.aborted, result.halted, result.exhausted,
                len(result.surviving))]
    for path, trace in result.surviving:
        lines.append("  %s: %s" % ("".join(map(str, path.choices)),
                                   " ".join(format_rational(v) for v in trace.emitted)))
    return "\n".join(lines)

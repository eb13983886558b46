"""Evaluating functions on weak representations.

Heaviside on sup names and sup-inf names, lifting of pointwise and
rowwise evaluators one level up, and the apply operators for lower
semi-continuous (LSC) and monotone LSC (MLSC) functions given by
enumerated names.

Function names:

    LscName    enumeration of triples (a, b, c) with a < b, c < min f[a, b]
    MlscName   enumeration of pairs (a, c) with c < f(a)

The analytic test functions below compute min f[a, b] in closed form,
so their names are exact.
"""

import json
import threading
from dataclasses import dataclass

from .exactnum import Q, RATIONALS, ONE, ZERO, format_rational, pow2, tuple_pair, tuple_unpair
from .machine import (ABORT, INTERNAL, READ, Emit, Guess, Indexwise, MachineError,
                      Program, Tape, apply, pointwise)
from .names import FAST, LIMINF, LOWER, Name, NameExhausted, TagMismatch
from .reductions import RowNormalizer, liminf_normalize, lt1_to_liminf


def h(x):
    """Heaviside: 0 for x <= 0, 1 for x > 0."""
    return ONE if x > 0 else ZERO


def h_bar(x):
    """Flipped Heaviside: 1 for x <= 0, 0 for x > 0."""
    return ONE if x <= 0 else ZERO


# -- Heaviside evaluators --------------------------------------------------------

def heaviside_lt():
    """p_n = h(q_n) on sup names."""
    return pointwise(lambda q, n: h(q), LOWER(0), LOWER(0), "heaviside-lt")


def _heaviside_lt1(view, n, cache):
    norm = cache.get("norm")
    if norm is None:
        norm = cache["norm"] = RowNormalizer(lambda i, j: view[tuple_pair(i, j)])
    i, j = tuple_unpair(n, 2)
    return h(norm(i, j) - pow2(-i))


def heaviside_lt1():
    """p<i,j> = h(t<i,j> - 2^-i) with t the row-normalized input."""
    return Indexwise(_heaviside_lt1, LOWER(1), LOWER(1), "heaviside-lt1")


def nonzero_indicator_lt():
    """f(0) = 0, f(x) = 1 otherwise, from fast names to sup names."""
    return pointwise(lambda q, n: ONE if abs(q) > pow2(-n) else ZERO,
                     FAST(0), LOWER(0), "nonzero-indicator")


def negate_to_lt():
    """g(x) = -x from fast names to sup names."""
    return pointwise(lambda q, n: -q - pow2(-n), FAST(0), LOWER(0), "negate")


# -- pointwise and rowwise lifting ---------------------------------------------------

class RationalEvaluator:
    """``eval(q, n)`` is within 2^-n of f(q).  ``exact`` is f itself when
    f maps rationals to rationals, else None."""

    def __init__(self, eval_fn, label="f", exact=None):
        self.eval = eval_fn
        self.label = label
        self.exact = exact

    @classmethod
    def from_exact(cls, fn, label="f"):
        return cls(lambda q, n: fn(q), label, fn)


SQUARE = RationalEvaluator.from_exact(lambda q: q * q, "square")
IDENTITY = RationalEvaluator.from_exact(lambda q: q, "identity")


def lift_pointwise_transformer(f):
    return pointwise(lambda q, n: f.eval(q, n), FAST(1), FAST(1), "lift(%s)" % f.label)


def lift_pointwise(f, name):
    if name.tag != FAST(1):
        raise TagMismatch("lift_pointwise takes a FAST(1) name")
    return apply(lift_pointwise_transformer(f), name)


def _rowwise_body(t, d):
    # Output entry n = <i, r> is emit r of t run on row i; row i's
    # entry r' sits at input index tuple_pair(i, *unpair(r', d)).
    tape = Tape()
    rows = {}
    n = 0
    while True:
        if d == 1:
            i, r = tuple_unpair(n, 2)
        else:
            idx = tuple_unpair(n, d + 1)
            i, r = idx[0], tuple_pair(*idx[1:])
        row = rows.get(i)
        if row is None:
            row = rows[i] = {"ex": t.start(), "reply": None, "reads": 0, "out": []}
        while len(row["out"]) <= r:
            action = row["ex"].advance(row["reply"])
            row["reply"] = None
            if action is None or action is ABORT:
                raise MachineError("row machine stopped on row %d" % i)
            if action is READ:
                k = row["reads"]
                sub = (k,) if d == 1 else tuple_unpair(k, d)
                pos = tuple_pair(i, *sub)
                yield from tape.upto(pos)
                row["reply"] = tape[pos]
                row["reads"] += 1
            elif isinstance(action, Emit):
                row["out"].append(action.value)
                yield INTERNAL
            elif isinstance(action, Guess):
                raise MachineError("rowwise lifting needs a deterministic machine")
            else:
                yield INTERNAL
        yield Emit(row["out"][r])
        n += 1


def lift_rowwise_transformer(t):
    """Run ``t`` (FAST(d) -> FAST(d), d >= 1) on every row of a FAST(d+1)
    name.  Rows are started on demand in output order."""
    if t.in_tag is None or t.in_tag.level < 1 or t.in_tag != t.out_tag:
        raise TagMismatch("rowwise lifting needs a FAST(d) -> FAST(d) machine, d >= 1")
    d = t.in_tag.level
    return Program(_rowwise_body, FAST(d + 1), FAST(d + 1), "rows(%s)" % t.label, (t, d))


def lift_rowwise(t, name):
    lifted = lift_rowwise_transformer(t)
    if name.tag != lifted.in_tag:
        raise TagMismatch("expected %s, got %s" % (lifted.in_tag, name.tag))
    return apply(lifted, name)


# -- test functions with closed-form minima ------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    key: str
    value: object       # x -> f(x)
    min_on: object      # (a, b) -> min f[a, b], a <= b
    monotone: bool = False


def _ramp_min(a, b):
    # 1 on x < 0, x on [0, 1], 2 on x > 1
    best = None
    if a < 0:
        best = ONE
    if b >= 0 and a <= 1:
        v = max(a, ZERO)
        best = v if best is None else min(best, v)
    if b > 1:
        best = Q(2) if best is None else min(best, Q(2))
    return best


def step_ramp(x):
    if x < 0:
        return ONE
    if x <= 1:
        return x
    return Q(2)


def ladder(x):
    """ceil(x) - 1: monotone and lower semi-continuous."""
    return Q(-((-x.numerator) // x.denominator) - 1)


HEAVISIDE_FN = TestFunction("heaviside", h, lambda a, b: h(a), True)
IDENTITY_FN = TestFunction("identity", lambda x: x, lambda a, b: a, True)
STEP_RAMP_FN = TestFunction("step-ramp", step_ramp, _ramp_min, False)
LADDER_FN = TestFunction("ladder", ladder, lambda a, b: ladder(a), True)

TEST_FUNCTIONS = {f.key: f for f in (HEAVISIDE_FN, IDENTITY_FN, STEP_RAMP_FN, LADDER_FN)}


# -- enumerated function names ------------------------------------------------------------

class Enumeration:
    """Lazy, memoized, thread-safe list produced by a generator."""

    def __init__(self, gen, label=""):
        self._gen = gen
        self._items = []
        self._lock = threading.Lock()
        self.label = label

    def __getitem__(self, k):
        if k < len(self._items):
            return self._items[k]
        with self._lock:
            while len(self._items) <= k:
                try:
                    self._items.append(next(self._gen))
                except StopIteration:
                    raise NameExhausted("enumeration has %d entries" % len(self._items)) from None
        return self._items[k]

    def prefix(self, n):
        if n > 0:
            self[n - 1]
        return list(self._items[:n])

    def to_jsonl(self, n):
        return "".join(json.dumps([format_rational(v) for v in item]) + "\n"
                       for item in self.prefix(n))


class LscName(Enumeration):
    pass


class MlscName(Enumeration):
    pass


def _triples(fn):
    n = 0
    while True:
        i, j, k = tuple_unpair(n, 3)
        a, b, c = RATIONALS[i], RATIONALS[j], RATIONALS[k]
        if a < b and c < fn.min_on(a, b):
            yield (a, b, c)
        n += 1


def _pairs(fn):
    n = 0
    while True:
        i, k = tuple_unpair(n, 2)
        a, c = RATIONALS[i], RATIONALS[k]
        if c < fn.value(a):
            yield (a, c)
        n += 1


def lsc_name(fn):
    """All (a, b, c) in canonical order of Q^3 with a < b and c < min f[a, b]."""
    return LscName(_triples(fn), "lsc name of %s" % fn.key)


def mlsc_name(fn):
    """All (a, c) in canonical order of Q^2 with c < f(a)."""
    return MlscName(_pairs(fn), "mlsc name of %s" % fn.key)


def enumeration_from_items(items, cls=LscName):
    return cls(iter([tuple(Q(v) for v in item) for item in items]), "from file")


# -- sentinels ----------------------------------------------------------------------------

class _Infinity:
    def __init__(self, sign):
        self.sign = sign

    def __repr__(self):
        return "+inf" if self.sign > 0 else "-inf"


POS_INF = _Infinity(1)
NEG_INF = _Infinity(-1)


def patch_infinite(values):
    """Replace +inf by max{0, earlier patched values}, leaving liminf alone."""
    out = []
    top = ZERO
    for v in values:
        if v is POS_INF:
            v = top
        out.append(v)
        if v > top:
            top = v
    return out


# -- LSC apply ----------------------------------------------------------------------------

class LscRaw:
    """The raw triple-indexed sequence of the LSC apply formula.

    entry(k, l, n) = max{c_m : m <= k, [a_m, b_m] contains [a_k, b_k]}
                     if q_n in (a_k, b_k) and b_k - a_k = 2^-l, else +inf.
    """

    def __init__(self, fname, q):
        self.fname = fname
        self.q = q
        self._best = {}
        self._lock = threading.Lock()

    def _max_c(self, k):
        v = self._best.get(k)
        if v is None:
            a, b, c = self.fname[k]
            v = c
            for m in range(k):
                am, bm, cm = self.fname[m]
                if am <= a and b <= bm and cm > v:
                    v = cm
            with self._lock:
                self._best[k] = v
        return v

    def entry(self, k, l, n):
        a, b, _ = self.fname[k]
        if b - a != pow2(-l):
            return POS_INF
        x = self.q[n]
        if not (a < x < b):
            return POS_INF
        return self._max_c(k)

    def __getitem__(self, m):
        return self.entry(*tuple_unpair(m, 3))


class MlscRaw:
    """The raw sequence of the MLSC apply formula, indices <k, n, l>.

    entry(k, n, l) = max{c_m : m <= k, a_m CMP a_k}
                     if a_k < q_n < a_k + 2^-l, else +inf.

    CMP is ">=" as the formula is printed ("ge"), or "<=" ("le").
    """

    def __init__(self, fname, q, comparison="ge"):
        if comparison not in ("ge", "le"):
            raise ValueError("comparison must be 'ge' or 'le'")
        self.fname = fname
        self.q = q
        self.comparison = comparison
        self._best = {}
        self._lock = threading.Lock()

    def _max_c(self, k):
        v = self._best.get(k)
        if v is None:
            a, c = self.fname[k]
            v = c
            ge = self.comparison == "ge"
            for m in range(k):
                am, cm = self.fname[m]
                if (am >= a if ge else am <= a) and cm > v:
                    v = cm
            with self._lock:
                self._best[k] = v
        return v

    def entry(self, k, n, l):
        a, _ = self.fname[k]
        x = self.q[n]
        if not (a < x < a + pow2(-l)):
            return POS_INF
        return self._max_c(k)

    def __getitem__(self, m):
        return self.entry(*tuple_unpair(m, 3))


def patched_name(raw, label="patched"):
    """The +inf-patched raw sequence as a LIMINF name."""
    state = {"top": ZERO}

    def produce(m):
        v = raw[m]
        if v is POS_INF:
            return state["top"]
        if v > state["top"]:
            state["top"] = v
        return v

    return Name(produce, LIMINF, label)


def _eventual_lsc(fname, q):
    # Row <k, N>: entries stay c_k while q_N, ..., q_{N+j} all lie in
    # (a_k, b_k); after the first miss the row falls to -j.
    def produce(m):
        row, j = tuple_unpair(m, 2)
        k, start = tuple_unpair(row, 2)
        a, b, c = fname[k]
        for i in range(j + 1):
            if not (a < q[start + i] < b):
                return Q(-j)
        return c
    return produce


def lsc_apply(fname, name, method="formula"):
    """Apply an LSC function name to a FAST(1) name; result is LOWER(1).

    method="formula": raw triple-indexed formula, +inf patch, then the
    liminf -> sup-inf conversion.
    method="eventual": row <k, N> keeps c_k while the input stays inside
    (a_k, b_k) from index N on, and falls to -infinity otherwise.
    """
    if name.tag != FAST(1):
        raise TagMismatch("lsc_apply takes a FAST(1) argument")
    if method == "formula":
        return liminf_normalize(patched_name(LscRaw(fname, name), "lsc formula"))
    if method == "eventual":
        return Name(_eventual_lsc(fname, name), LOWER(1), "lsc eventual")
    raise ValueError("unknown method %r" % method)


def _eventual_mlsc(fname, u):
    # Row <k, i>: entries stay c_k while a_k < u<i, j'> for all j' <= j.
    def produce(m):
        row, j = tuple_unpair(m, 2)
        k, i = tuple_unpair(row, 2)
        a, c = fname[k]
        for jj in range(j + 1):
            if not a < u[tuple_pair(i, jj)]:
                return Q(-j)
        return c
    return produce


def mlsc_apply(fname, name, method="formula", comparison="ge"):
    """Apply an MLSC function name to a LOWER(1) name; result is LOWER(1).

    method="formula": sup-inf -> liminf, raw formula with the chosen
    comparison, +inf patch, liminf -> sup-inf.
    method="eventual": row <k, i> keeps c_k while a_k stays below row i
    of the input, and falls to -infinity otherwise.
    """
    if name.tag != LOWER(1):
        raise TagMismatch("mlsc_apply takes a LOWER(1) argument")
    if method == "formula":
        q = apply(lt1_to_liminf(), name)
        return liminf_normalize(patched_name(MlscRaw(fname, q, comparison), "mlsc formula"))
    if method == "eventual":
        return Name(_eventual_mlsc(fname, name), LOWER(1), "mlsc eventual")
    raise ValueError("unknown method %r" % method)


def mlsc_eval_sup(fname, name):
    """p_n = c_n if a_n <= q_n, else -inf, on a nondecreasing sup name.

    A -inf entry is replaced by the last finite value; leading -inf
    entries take the first finite value, found by reading ahead.
    """
    if name.tag != LOWER(0):
        raise TagMismatch("mlsc_eval_sup takes a LOWER(0) argument")

    def raw(n):
        a, c = fname[n]
        return c if a <= name[n] else NEG_INF

    state = {"last": None}

    def produce(n):
        v = raw(n)
        if v is NEG_INF:
            if state["last"] is None:
                k = n + 1
                while raw(k) is NEG_INF:
                    k += 1
                state["last"] = raw(k)
            return state["last"]
        state["last"] = v
        return v

    return Name(produce, LOWER(0), "mlsc sup")


def mlsc_enumerate(t, steps_per_turn=64, strict=False):
    """Enumerate pairs (a, c) by running t on constant names of every
    rational a.  Stage s gives each of the first s+1 rationals one turn
    of ``steps_per_turn`` steps; each emit c becomes the pair (a, c).
    With strict=True the pair is (a, c - 2^-r), r the output index, so
    that c < f(a) holds even when t emits f(a) itself."""

    def gen():
        runs = []
        s = 0
        while True:
            a = RATIONALS[s]
            runs.append({"a": a, "ex": t.start(), "reply": None, "out": 0, "done": False})
            for run in runs:
                if run["done"]:
                    continue
                for _ in range(steps_per_turn):
                    action = run["ex"].advance(run["reply"])
                    run["reply"] = None
                    if action is None or action is ABORT:
                        run["done"] = True
                        break
                    if action is READ:
                        run["reply"] = run["a"]
                    elif isinstance(action, Emit):
                        c = action.value
                        if strict:
                            c -= pow2(-run["out"])
                        run["out"] += 1
                        yield (run["a"], c)
            s += 1

    return MlscName(gen(), "mlsc name of %s" % t.label)


# -- semi-decision ----------------------------------------------------------------------

@dataclass(frozen=True)
class Yes:
    index: int
    triple: tuple


@dataclass(frozen=True)
class Unknown:
    scanned: int


def exceeds_semidecide(fname, a, b, c, budget):
    """Yes if some listed (a', b', c') meets [a, b] and has c' >= c, which
    proves f > c somewhere on [a, b].  Unknown when the budget runs out."""
    a, b, c = Q(a), Q(b), Q(c)
    for k in range(budget):
        try:
            a2, b2, c2 = fname[k]
        except NameExhausted:
            return Unknown(k)
        if a2 <= b and a <= b2 and c2 >= c:
            return Yes(k, (a2, b2, c2))
    return Unknown(budget)

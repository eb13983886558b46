"""Names: tagged lazy rational streams, synthetic generators, finite checks.

A name is a total function from indices to rationals together with a
representation tag saying how the stream denotes a real:

    FAST(0)     |x - q_n| <= 2^-n
    FAST(d)     x = lim_{n1} ... lim_{nd} q<n1,...,nd>        (d >= 1)
    LOWER(0)    x = sup_n q_n
    LOWER(1)    x = sup_i inf_j q<i,j>   (and so on, alternating)
    UPPER(d)    the order dual of LOWER(d)
    HOTZ        |x - q_n| <= 2^-n for all n beyond some unknown N
    BINARY      digit stream b, d1, d2, ... of x = b.d1d2..., digits 0/1
    LIMINF      x = liminf q_n
    LIMINF_STRICT   as LIMINF, and q_n < x infinitely often

Multi-indexed names are flat streams addressed through left-associated
Cantor tupling, see ``exactnum.tuple_pair``.
"""

import enum
import json
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import Q, ONE, ZERO, format_rational, parse_rational, pow2, tuple_pair, tuple_unpair


class Kind(enum.Enum):
    FAST = "FAST"
    LOWER = "LOWER"
    UPPER = "UPPER"
    HOTZ = "HOTZ"
    BINARY = "BINARY"
    LIMINF = "LIMINF"
    LIMINF_STRICT = "LIMINF_STRICT"


LEVELED = (Kind.FAST, Kind.LOWER, Kind.UPPER)


@dataclass(frozen=True)
class ReprTag:
    kind: Kind
    level: int = None

    def __post_init__(self):
        if self.kind in LEVELED:
            if not isinstance(self.level, int) or self.level < 0:
                raise ValueError("%s needs a level d >= 0" % self.kind.value)
        elif self.level is not None:
            raise ValueError("%s carries no level" % self.kind.value)

    @property
    def arity(self):
        """Number of indices in the tupled stream."""
        if self.kind is Kind.FAST:
            return max(self.level, 1)
        if self.kind in (Kind.LOWER, Kind.UPPER):
            return self.level + 1
        return 1

    def to_json(self):
        return {"tag": self.kind.value, "level": self.level}

    @classmethod
    def from_json(cls, obj):
        return cls(Kind(obj["tag"]), obj.get("level"))

    def __str__(self):
        if self.level is None:
            return self.kind.value
        return "%s(%d)" % (self.kind.value, self.level)


def FAST(d=0):
    return ReprTag(Kind.FAST, d)


def LOWER(d=0):
    return ReprTag(Kind.LOWER, d)


def UPPER(d=0):
    return ReprTag(Kind.UPPER, d)


HOTZ = ReprTag(Kind.HOTZ)
BINARY = ReprTag(Kind.BINARY)
LIMINF = ReprTag(Kind.LIMINF)
LIMINF_STRICT = ReprTag(Kind.LIMINF_STRICT)


@dataclass(frozen=True)
class PairTag:
    """Tag of two names interleaved into one stream: left at even
    positions, right at odd ones."""

    left: ReprTag
    right: ReprTag

    def __str__(self):
        return "%s+%s" % (self.left, self.right)


class NameExhausted(IndexError):
    """A finite name was read past its end."""


class TagMismatch(ValueError):
    pass


class Name:
    """A memoized, thread-safe lazy stream of rationals.

    ``producer(i)`` is called exactly once per index, in increasing
    order, so producers may rely on earlier entries being computed.
    """

    def __init__(self, producer, tag, label=""):
        self._producer = producer
        self.tag = tag
        self.label = label
        self._memo = []
        self._lock = threading.RLock()

    def __getitem__(self, i):
        memo = self._memo
        if i < len(memo):
            return memo[i]
        if i < 0:
            raise IndexError(i)
        with self._lock:
            while len(memo) <= i:
                memo.append(Q(self._producer(len(memo))))
        return memo[i]

    def at(self, *idx):
        return self[tuple_pair(*idx)]

    def prefix(self, n):
        if n > 0:
            self[n - 1]
        return list(self._memo[:n])

    def computed(self):
        return len(self._memo)

    def retag(self, tag, label=None):
        """Same stream, new tag.  Shares the memo of this name."""
        return Name(self.__getitem__, tag, self.label if label is None else label)

    def map(self, fn, tag, label=""):
        return Name(lambda i: fn(self[i]), tag, label)

    @classmethod
    def from_values(cls, values, tag, pad_last=False, label="finite"):
        vals = [Q(v) for v in values]

        def produce(i):
            if i < len(vals):
                return vals[i]
            if pad_last and vals:
                return vals[-1]
            raise NameExhausted("name has only %d entries" % len(vals))

        return cls(produce, tag, label)

    @classmethod
    def from_function(cls, fn, tag, label=""):
        return cls(fn, tag, label)

    @classmethod
    def from_tuple_function(cls, fn, tag, label=""):
        """Build a multi-indexed name from fn(i1, ..., id)."""
        d = tag.arity
        return cls(lambda n: fn(*tuple_unpair(n, d)), tag, label)

    def __repr__(self):
        return "Name(%s, %s)" % (self.tag, self.label or "anonymous")


def interleave(left, right):
    """One stream carrying two names, for machines with two inputs."""
    def produce(n):
        return left[n // 2] if n % 2 == 0 else right[n // 2]
    return Name(produce, PairTag(left.tag, right.tag), "%s+%s" % (left.label, right.label))


def prefix(name, n):
    return name.prefix(n)


def constant(value, tag):
    v = Q(value)
    return Name(lambda i: v, tag, "constant %s" % format_rational(v))


# -- synthetic names ---------------------------------------------------------

APPROACHES = ("exact", "above", "below", "alternate", "random")


@dataclass(frozen=True)
class Schedule:
    """Perturbation plan of a synthetic name.

    approach   how entries approach the target (see APPROACHES)
    junk       number of junk entries in front (HOTZ, FAST d>=1 inner index)
    junk_values  explicit junk, else derived from the seed
    settle     LOWER/UPPER d=0: index from which the target is hit exactly;
               LOWER/UPPER d=1: first row whose infimum is the target
    row_delay  double-indexed names: entries j < row_delay + i*row_growth
               of row i are perturbed, later ones are exact
    row_growth see row_delay
    seed       for the "random" approach and for derived junk
    """

    approach: str = "exact"
    junk: int = 0
    junk_values: tuple = None
    settle: int = 0
    row_delay: int = 0
    row_growth: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.approach not in APPROACHES:
            raise ValueError("unknown approach %r" % self.approach)
        if min(self.junk, self.settle, self.row_delay, self.row_growth) < 0:
            raise ValueError("schedule parameters must be natural numbers")
        if self.junk_values is not None:
            object.__setattr__(self, "junk_values", tuple(Q(v) for v in self.junk_values))
            if len(self.junk_values) < self.junk:
                raise ValueError("fewer junk values than junk length")

    def to_json(self):
        out = {
            "approach": self.approach,
            "junk": self.junk,
            "settle": self.settle,
            "row_delay": self.row_delay,
            "row_growth": self.row_growth,
            "seed": self.seed,
        }
        if self.junk_values is not None:
            out["junk_values"] = [format_rational(v) for v in self.junk_values]
        return out

    @classmethod
    def from_json(cls, obj):
        obj = dict(obj)
        if "junk_values" in obj and obj["junk_values"] is not None:
            obj["junk_values"] = tuple(Q(v) for v in obj["junk_values"])
        return cls(**obj)


@dataclass(frozen=True)
class SyntheticSpec:
    target: Fraction
    tag: ReprTag
    schedule: Schedule = field(default_factory=Schedule)

    def __post_init__(self):
        object.__setattr__(self, "target", Q(self.target))

    def delay(self, row):
        return self.schedule.row_delay + row * self.schedule.row_growth

    def horizon(self):
        """Settling data recorded by the schedule, keyed by what it bounds."""
        s, kind = self.schedule, self.tag.kind
        if kind is Kind.HOTZ:
            return {"N": s.junk}
        if kind in (Kind.LOWER, Kind.UPPER) and self.tag.level == 0:
            return {"settle": s.settle}
        if kind in (Kind.LOWER, Kind.UPPER) and self.tag.level == 1:
            return {"rows": s.settle, "cols": max(self.delay(i) for i in range(s.settle + 1))}
        if kind is Kind.FAST and self.tag.level >= 1:
            return {"junk": s.junk}
        return {}

    def to_json(self):
        return {"target": format_rational(self.target), "tag": self.tag.kind.value,
                "level": self.tag.level, "schedule": self.schedule.to_json()}

    @classmethod
    def from_json(cls, obj):
        tag = ReprTag(Kind(obj["tag"]), obj.get("level"))
        return cls(Q(obj["target"]), tag, Schedule.from_json(obj.get("schedule", {})))


def _theta(schedule, n, salt=""):
    """Signed weight in [-1, 1] applied to 2^-n by the approach."""
    a = schedule.approach
    if a == "exact":
        return ZERO
    if a == "above":
        return ONE
    if a == "below":
        return -ONE
    if a == "alternate":
        return ONE if n % 2 == 0 else -ONE
    rng = random.Random("theta:%d:%s:%d" % (schedule.seed, salt, n))
    return Fraction(rng.randint(-16, 16), 16)


def _positive_weight(schedule, n, salt=""):
    """Weight in (0, 1] for one-sided approaches."""
    if schedule.approach == "random":
        rng = random.Random("pos:%d:%s:%d" % (schedule.seed, salt, n))
        return Fraction(rng.randint(1, 16), 16)
    return ONE


def _junk(schedule, target, n):
    if schedule.junk_values is not None:
        return schedule.junk_values[n]
    # far from the target and from each other, so consistency checks trip
    rng = random.Random("junk:%d:%d" % (schedule.seed, n))
    mag = 8 + 4 * n + rng.randint(0, 3)
    sign = 1 if n % 2 == 0 else -1
    return target + sign * mag


def _binary_digit(x, n, upper_expansion):
    """n-th token of the BINARY name of x in [0, 2]: b, d1, d2, ..."""
    if upper_expansion:
        # the expansion ending in 1s, for dyadic x > 0
        if n == 0:
            return ONE if x > 1 else ZERO
        rest = x - (1 if x > 1 else 0)
        scaled = rest * pow2(n)
        # digit is 1 iff the n-th dyadic cell closing at or below rest is odd
        k = -(-scaled // 1) - 1
        return ONE if k % 2 == 1 else ZERO
    if n == 0:
        return ONE if x >= 1 else ZERO
    rest = x - (1 if x >= 1 else 0)
    k = (rest * pow2(n)) // 1
    return ONE if k % 2 == 1 else ZERO


class UnsupportedSynthetic(ValueError):
    pass


def make_synthetic(spec):
    x, tag, s = spec.target, spec.tag, spec.schedule
    kind, d = tag.kind, tag.level
    label = "synthetic %s of %s" % (tag, format_rational(x))

    if kind is Kind.FAST and d == 0:
        if s.junk:
            raise UnsupportedSynthetic("a FAST(0) name cannot carry junk")
        return Name(lambda n: x + _theta(s, n) * pow2(-n), tag, label)

    if kind is Kind.FAST or kind is Kind.HOTZ:
        arity = tag.arity

        def produce_fast(n):
            idx = tuple_unpair(n, arity)
            inner = idx[-1]
            if inner < s.junk:
                return _junk(s, x, inner + sum(idx[:-1]))
            v = x
            for depth, k in enumerate(idx):
                v += _theta(s, k, str(depth)) * pow2(-k)
            return v

        return Name(produce_fast, tag, label)

    if kind is Kind.LOWER or kind is Kind.UPPER:
        sign = 1 if kind is Kind.LOWER else -1
        base = sign * x
        if d == 0:
            def produce_lower0(n):
                if n >= s.settle:
                    return sign * base
                return sign * (base - _positive_weight(s, n) * pow2(-n))
            return Name(produce_lower0, tag, label)
        if d == 1:
            def produce_lower1(n):
                i, j = tuple_unpair(n, 2)
                row_inf = base if i >= s.settle else base - pow2(-i)
                if j >= spec.delay(i):
                    return sign * row_inf
                if s.approach == "alternate":
                    bump = ONE if j % 2 == 1 else ZERO
                else:
                    bump = _positive_weight(s, i, "row") * pow2(-j)
                return sign * (row_inf + bump)
            return Name(produce_lower1, tag, label)
        raise UnsupportedSynthetic("synthetic %s names are limited to d <= 1" % kind.value)

    if kind is Kind.LIMINF or kind is Kind.LIMINF_STRICT:
        strict = kind is Kind.LIMINF_STRICT

        def produce_liminf(n):
            if s.approach == "exact" and not strict:
                return x
            if n % 2 == 1:
                return x + 1
            return x - pow2(-n) if strict else x + pow2(-n)

        return Name(produce_liminf, tag, label)

    if kind is Kind.BINARY:
        if not (ZERO <= x <= 2) or (x == 2 and s.approach != "below"):
            raise UnsupportedSynthetic("BINARY names encode x in [0, 2)")
        upper = s.approach == "below" and x > 0
        return Name(lambda n: _binary_digit(x, n, upper), tag, label)

    raise UnsupportedSynthetic("no generator for %s" % tag)


# -- finite consistency checks -------------------------------------------------

@dataclass(frozen=True)
class Consistent:
    ok = True


@dataclass(frozen=True)
class ViolatedAt:
    k: int
    l: int
    ok = False


@dataclass(frozen=True)
class NotCheckable:
    reason: str
    ok = None


def check_consistency(tag, values, hypothesis=None):
    """Look for the lexicographically first index pair refuting the prefix.

    Consistent only means "not refuted by this prefix".
    """
    qs = [Q(v) for v in values]
    if tag.kind is Kind.FAST and tag.level == 0:
        for k in range(len(qs)):
            for l in range(k + 1, len(qs)):
                if abs(qs[k] - qs[l]) > pow2(-k) + pow2(-l):
                    return ViolatedAt(k, l)
        return Consistent()
    if tag.kind is Kind.HOTZ:
        N = 0 if hypothesis is None else int(hypothesis.get("N", 0) if isinstance(hypothesis, dict) else hypothesis)
        for n in range(N, len(qs)):
            for k in range(n + 1, len(qs)):
                if abs(qs[n] - qs[k]) > pow2(-n + 1):
                    return ViolatedAt(n, k)
        return Consistent()
    if tag.kind is Kind.BINARY:
        for k, v in enumerate(qs):
            if v not in (ZERO, ONE):
                return ViolatedAt(k, k)
        return Consistent()
    return NotCheckable("%s admits every finite prefix" % tag)


# -- name files ---------------------------------------------------------------

class NameFileError(ValueError):
    pass


def dump_name_file(values, tag, params=None):
    """JSON-lines text: a header {"tag", "level", "params"}, then one
    ``p/q`` per line."""
    head = {"tag": tag.kind.value, "level": tag.level, "params": params or {}}
    lines = [json.dumps(head, sort_keys=True)]
    lines.extend(format_rational(Q(v)) for v in values)
    return "\n".join(lines) + "\n"


def load_name_file(text):
    """Returns (tag, params, values)."""
    lines = text.splitlines()
    if not lines:
        raise NameFileError("empty name file")
    try:
        head = json.loads(lines[0])
        tag = ReprTag(Kind(head["tag"]), head.get("level"))
    except (ValueError, KeyError, TypeError) as err:
        raise NameFileError("bad header: %s" % err) from err
    values = []
    for k, line in enumerate(lines[1:], 2):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(parse_rational(line))
        except (ValueError, ZeroDivisionError) as err:
            raise NameFileError("line %d: %s" % (k, err)) from err
    return tag, head.get("params") or {}, values

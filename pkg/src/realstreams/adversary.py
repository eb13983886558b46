"""Prefix-swap adversaries against claimed function evaluators.

A claimant is a deterministic transformer said to compute a target
function f between two representations.  The adversary feeds it a name
of a witness point, waits until some output commits to a value, notes
how much input was read, and then continues the read prefix into a name
of a different point where the committed value is wrong.  A success is a
Certificate: the inputs (as small descriptors), the recorded traces and
an exact rational predicate over them.  ``verify_certificate`` replays
the runs and evaluates the predicate without using the engine.

Single round variants (``adv_prefix_swap``):

    FAST_FAST      FAST(0) -> FAST(0)
    FAST_LOWER     FAST(0) -> LOWER(0)
    LOWER_LOWER    LOWER(0) -> LOWER(0)

Round-based variants (``adv_omega_rounds``), truncated after R rounds:

    LIMIT_LIMIT    FAST(1) -> FAST(1)
    LIMIT_LOWER1   FAST(1) -> LOWER(1)
    LOWER1_LOWER1  LOWER(1) -> LOWER(1)
"""

import enum
import json
from dataclasses import dataclass, field

from .exactnum import ONE, ZERO, Q, format_rational, parse_rational, pow2, tuple_unpair
from .lifting import h, h_bar
from .machine import Trace, run
from .names import FAST, LOWER, Name, ReprTag, TagMismatch

FORMAT = "realstreams-certificate/1"


class Variant(enum.Enum):
    FAST_FAST = "FAST_FAST"
    FAST_LOWER = "FAST_LOWER"
    LOWER_LOWER = "LOWER_LOWER"
    LIMIT_LIMIT = "LIMIT_LIMIT"
    LIMIT_LOWER1 = "LIMIT_LOWER1"
    LOWER1_LOWER1 = "LOWER1_LOWER1"


VARIANT_TAGS = {
    Variant.FAST_FAST: (FAST(0), FAST(0)),
    Variant.FAST_LOWER: (FAST(0), LOWER(0)),
    Variant.LOWER_LOWER: (LOWER(0), LOWER(0)),
    Variant.LIMIT_LIMIT: (FAST(1), FAST(1)),
    Variant.LIMIT_LOWER1: (FAST(1), LOWER(1)),
    Variant.LOWER1_LOWER1: (LOWER(1), LOWER(1)),
}

SWAP_VARIANTS = (Variant.FAST_FAST, Variant.FAST_LOWER, Variant.LOWER_LOWER)
ROUND_VARIANTS = (Variant.LIMIT_LIMIT, Variant.LIMIT_LOWER1, Variant.LOWER1_LOWER1)


# -- targets ----------------------------------------------------------------------------

class Target:
    """A function with exact values at rationals plus witness data.

    ``point`` is approached from the side ``side`` by point + side*2^-n;
    ``limit`` is the limit of f along that approach.  ``pair`` (a, b),
    a < b, is used by the monotonicity variants.
    """

    def __init__(self, key, fn, point=ZERO, side=1, limit=None, pair=(ZERO, ONE), data=None):
        self.key = key
        self.fn = fn
        self.point = Q(point)
        self.side = side
        self.limit = None if limit is None else Q(limit)
        self.pair = (Q(pair[0]), Q(pair[1]))
        self.data = data

    def __call__(self, x):
        return Q(self.fn(Q(x)))

    def approach(self, k):
        return self.point + self.side * pow2(-k)

    def to_json(self):
        if self.key != "CUSTOM":
            return {"key": self.key}
        out = dict(self.data)
        out["key"] = "CUSTOM"
        return out

    @classmethod
    def from_json(cls, obj):
        key = obj["key"]
        if key == "HEAVISIDE":
            return HEAVISIDE
        if key == "FLIPPED_HEAVISIDE":
            return FLIPPED_HEAVISIDE
        if key == "CUSTOM":
            return custom_target(
                {parse_rational(k): parse_rational(v) for k, v in obj["table"].items()},
                otherwise=None if obj.get("otherwise") is None else parse_rational(obj["otherwise"]),
                point=parse_rational(obj.get("point", "0/1")),
                side=obj.get("side", 1),
                limit=None if obj.get("limit") is None else parse_rational(obj["limit"]),
                pair=[parse_rational(v) for v in obj.get("pair", ["0/1", "1/1"])])
        raise ValueError("unknown target %r" % key)

    def __repr__(self):
        return "Target(%s)" % self.key


HEAVISIDE = Target("HEAVISIDE", h, limit=ONE)
FLIPPED_HEAVISIDE = Target("FLIPPED_HEAVISIDE", h_bar, limit=ZERO)


def custom_target(table, otherwise=None, point=ZERO, side=1, limit=None, pair=(ZERO, ONE)):
    """f given by a finite table, and ``otherwise`` elsewhere (if set)."""
    table = {Q(k): Q(v) for k, v in table.items()}
    fallback = None if otherwise is None else Q(otherwise)

    def fn(x):
        if x in table:
            return table[x]
        if fallback is None:
            raise KeyError("target undefined at %s" % format_rational(x))
        return fallback

    data = {
        "table": {format_rational(k): format_rational(v) for k, v in sorted(table.items())},
        "otherwise": None if fallback is None else format_rational(fallback),
        "point": format_rational(Q(point)),
        "side": side,
        "limit": None if limit is None else format_rational(Q(limit)),
        "pair": [format_rational(Q(v)) for v in pair],
    }
    return Target("CUSTOM", fn, point, side, limit, pair, data)


# -- claims and outcomes -----------------------------------------------------------------

@dataclass
class ClaimSpec:
    """A transformer together with what it claims to compute.

    ``source`` identifies the transformer inside certificates:
    {"registry": id} or {"external": argv}.
    """
    transformer: object
    target: Target
    in_tag: ReprTag = None
    out_tag: ReprTag = None
    source: dict = None

    def __post_init__(self):
        if self.in_tag is None:
            self.in_tag = self.transformer.in_tag
        if self.out_tag is None:
            self.out_tag = self.transformer.out_tag


@dataclass
class Certificate:
    data: dict

    def to_json(self):
        return self.data

    def dumps(self):
        return json.dumps(self.data, sort_keys=True, indent=1) + "\n"


@dataclass
class Refuted:
    """The claim survived the attack within the budget."""
    reason: str
    runs: list = field(default_factory=list)


@dataclass
class NonProductive(Refuted):
    """The claimant never committed on a valid name: ``round`` and its input."""
    round: int = 0
    input: dict = None


def _check_tags(claim, variant):
    want = VARIANT_TAGS[variant]
    got = (claim.in_tag, claim.out_tag)
    if got != want:
        raise TagMismatch("%s needs %s -> %s, claim is %s -> %s"
                          % (variant.value, want[0], want[1], got[0], got[1]))


# -- input descriptors ---------------------------------------------------------------------

def approach_input(center, sign):
    return {"kind": "approach", "center": format_rational(Q(center)), "sign": sign}


def prefix_input(prefix, constant):
    return {"kind": "prefix_then_constant",
            "prefix": [format_rational(Q(v)) for v in prefix],
            "constant": format_rational(Q(constant))}


def rows_input(low, high, thresholds, close_all):
    return {"kind": "rows_tail", "low": format_rational(Q(low)), "high": format_rational(Q(high)),
            "thresholds": [list(t) for t in thresholds], "close_all": close_all}


def _row_limits(desc):
    """Column bound per row for a rows_tail descriptor: row i is low
    beyond column J_m, m the first threshold with i <= i_m."""
    return [(i_m, j_m) for i_m, j_m in desc["thresholds"]]


def build_input(desc, tag):
    kind = desc["kind"]
    if kind == "approach":
        c = parse_rational(desc["center"])
        s = desc["sign"]
        return Name(lambda n: c + s * pow2(-n), tag, "approach")
    if kind == "prefix_then_constant":
        pre = [parse_rational(v) for v in desc["prefix"]]
        c = parse_rational(desc["constant"])
        return Name(lambda n: pre[n] if n < len(pre) else c, tag, "prefix+constant")
    if kind == "rows_tail":
        low = parse_rational(desc["low"])
        high = parse_rational(desc["high"])
        limits = _row_limits(desc)
        close_all = desc["close_all"]

        def produce(n):
            i, j = tuple_unpair(n, 2)
            for i_m, j_m in limits:
                if i <= i_m:
                    return low if j > j_m else high
            if close_all and limits:
                return low if j > limits[-1][1] else high
            if close_all:
                return low
            return high

        return Name(produce, tag, "rows")
    raise ValueError("unknown input kind %r" % kind)


def input_point(desc):
    """The real an input descriptor denotes when it is valid."""
    kind = desc["kind"]
    if kind == "approach":
        return parse_rational(desc["center"])
    if kind == "prefix_then_constant":
        return parse_rational(desc["constant"])
    if kind == "rows_tail":
        return parse_rational(desc["low" if desc["close_all"] else "high"])
    raise ValueError("unknown input kind %r" % kind)


def input_valid(desc, tag):
    """Exact check that the descriptor is a name of ``input_point`` under ``tag``."""
    kind = desc["kind"]
    if kind == "approach":
        return tag == FAST(0) and desc["sign"] in (1, -1)
    if kind == "prefix_then_constant":
        pre = [parse_rational(v) for v in desc["prefix"]]
        c = parse_rational(desc["constant"])
        if tag == FAST(0):
            return all(abs(q - c) <= pow2(-n) for n, q in enumerate(pre))
        if tag == LOWER(0):
            return all(q <= c for q in pre)
        return tag == FAST(1)
    if kind == "rows_tail":
        limits = desc["thresholds"]
        increasing = all(a[0] < b[0] and a[1] <= b[1] for a, b in zip(limits, limits[1:]))
        low = parse_rational(desc["low"])
        high = parse_rational(desc["high"])
        return tag == LOWER(1) and low <= high and increasing
    return False


# -- predicates ----------------------------------------------------------------------------

class PredicateError(ValueError):
    pass


def _eval(expr, ctx):
    if isinstance(expr, str):
        return parse_rational(expr)
    if not isinstance(expr, dict) or len(expr) != 1:
        raise PredicateError("bad expression %r" % (expr,))
    (op, arg), = expr.items()
    if op == "emit":
        r, i = arg
        return ctx["runs"][r]["trace"].emitted[i]
    if op == "input":
        r, i = arg
        return ctx["inputs"][r][i]
    if op == "point":
        return input_point(ctx["runs"][arg]["input"])
    if op == "f":
        return ctx["target"](_eval(arg, ctx))
    if op == "pow2":
        return pow2(arg)
    if op == "abs":
        return abs(_eval(arg, ctx))
    if op == "sub":
        return _eval(arg[0], ctx) - _eval(arg[1], ctx)
    raise PredicateError("unknown operator %r" % op)


_CMP = {
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "eq": lambda a, b: a == b,
}


def holds(pred, ctx):
    if "all" in pred:
        return all(holds(p, ctx) for p in pred["all"])
    if "valid" in pred:
        r = pred["valid"]
        return input_valid(ctx["runs"][r]["input"], ctx["in_tag"])
    if "cmp" in pred:
        return _CMP[pred["cmp"]](_eval(pred["lhs"], ctx), _eval(pred["rhs"], ctx))
    raise PredicateError("bad predicate %r" % (pred,))


def _cmp(op, lhs, rhs):
    return {"cmp": op, "lhs": lhs, "rhs": rhs}


def _lit(x):
    return format_rational(Q(x))


# -- engine helpers ---------------------------------------------------------------------------

def _record(runs, desc, trace, label):
    runs.append({"label": label, "input": desc, "trace": trace})
    return len(runs) - 1


def _certificate(claim, variant, runs, predicate, rounds, threshold=None):
    ctx = {"runs": runs, "target": claim.target, "in_tag": claim.in_tag}
    if not holds(predicate, ctx):
        return None
    data = {
        "format": FORMAT,
        "claimant": claim.source or {"label": claim.transformer.label},
        "variant": variant.value,
        "in_tag": claim.in_tag.to_json(),
        "out_tag": claim.out_tag.to_json(),
        "target": claim.target.to_json(),
        "rounds": rounds,
        "threshold": None if threshold is None else _lit(threshold),
        "runs": [{"label": r["label"], "input": r["input"], "trace": r["trace"].to_json()}
                 for r in runs],
        "predicate": predicate,
    }
    return Certificate(data)


def _run_until(claim, desc, stop, max_steps):
    name = build_input(desc, claim.in_tag)
    trace = run(claim.transformer, name, max_steps=max_steps, stop=stop)
    hit = bool(trace.emitted) and stop(len(trace.emitted) - 1, trace.emitted[-1])
    return trace, hit


def _first_m(delta):
    # smallest M >= 2 with delta > 2^(1-M)
    m = 2
    while delta <= pow2(1 - m):
        m += 1
    return m


# -- single round ------------------------------------------------------------------------------

def adv_prefix_swap(claim, variant, max_steps=10 ** 5):
    """Run the prefix-swap construction once.

    FAST_FAST: feed point + side*2^-n until output M is out (M chosen so
    that 2^(1-M) < |f(point) - limit|), swap to the read prefix continued
    by its last entry x~ = q_N, and compare output M with f(x~).
    FAST_LOWER: commit is an output >= (2y + limit)/3, y = f(point); the
    same swap must keep that output although f(x~) is below it.
    LOWER_LOWER: with a < b from the target pair, feed the constant
    name of a, commit at an output >= (2f(a) + f(b))/3, then swap to the
    read copies of a followed by b forever.
    """
    variant = Variant(variant)
    if variant not in SWAP_VARIANTS:
        raise ValueError("%s is not a prefix-swap variant" % variant.value)
    _check_tags(claim, variant)
    f = claim.target
    runs = []

    if variant is Variant.LOWER_LOWER:
        a, b = f.pair
        c = (2 * f(a) + f(b)) / 3
        first = prefix_input([], a)
        trace, hit = _run_until(claim, first, lambda i, v: v >= c, max_steps)
        if not hit:
            return NonProductive("no output >= %s" % _lit(c), [trace], 1, first)
        M = len(trace.emitted) - 1
        r0 = _record(runs, first, trace, "witness")
        swapped = prefix_input([a] * trace.read_at_emit[M], b)
        t1 = run(claim.transformer, build_input(swapped, claim.in_tag), max_steps=max_steps,
                 max_emits=M + 1)
        r1 = _record(runs, swapped, t1, "swapped")
        if len(t1.emitted) <= M:
            return Refuted("swapped run stopped early", [trace, t1])
        pred = {"all": [{"valid": r0}, {"valid": r1},
                        _cmp("eq", {"emit": [r0, M]}, {"emit": [r1, M]}),
                        _cmp("gt", {"emit": [r1, M]}, {"f": {"point": r1}})]}
        cert = _certificate(claim, variant, runs, pred, 1, c)
        return cert or Refuted("committed output is not above f(b)", [trace, t1])

    y = f(f.point)
    if f.limit is None:
        raise ValueError("target needs a limit value for %s" % variant.value)
    first = approach_input(f.point, f.side)
    if variant is Variant.FAST_FAST:
        if y == f.limit:
            return Refuted("target has no jump at the witness point")
        M = _first_m(abs(y - f.limit))
        trace, hit = _run_until(claim, first, lambda i, v: i == M, max_steps)
        c = None
    else:
        c = (2 * y + f.limit) / 3
        trace, hit = _run_until(claim, first, lambda i, v: v >= c, max_steps)
        M = len(trace.emitted) - 1
    if not hit:
        return NonProductive("no committing output", [trace], 1, first)
    r0 = _record(runs, first, trace, "witness")
    if variant is Variant.FAST_FAST:
        off = _cmp("gt", {"abs": {"sub": [{"emit": [r0, M]}, {"f": {"point": r0}}]}},
                   {"pow2": -M})
        cert = _certificate(claim, variant, runs, {"all": [{"valid": r0}, off]}, 1)
        if cert is not None:
            return cert
    N = max(trace.read_at_emit[M] - 1, 0)
    name = build_input(first, claim.in_tag)
    prefix = [name[n] for n in range(N + 1)]
    swapped = prefix_input(prefix, prefix[-1])
    t1 = run(claim.transformer, build_input(swapped, claim.in_tag), max_steps=max_steps,
             max_emits=M + 1)
    r1 = _record(runs, swapped, t1, "swapped")
    if len(t1.emitted) <= M:
        return Refuted("swapped run stopped early", [trace, t1])
    if variant is Variant.FAST_FAST:
        wrong = _cmp("gt", {"abs": {"sub": [{"emit": [r1, M]}, {"f": {"point": r1}}]}},
                     {"pow2": -M})
    else:
        wrong = _cmp("gt", {"emit": [r1, M]}, {"f": {"point": r1}})
    pred = {"all": [{"valid": r1}, wrong]}
    cert = _certificate(claim, variant, runs, pred, 1, c)
    return cert or Refuted("swapped output is consistent with the target", [trace, t1])


# -- omega rounds ---------------------------------------------------------------------------------

def adv_omega_rounds(claim, variant, rounds, max_steps=10 ** 5):
    """Run R rounds of the limit construction.

    LIMIT_LIMIT: round k feeds the read prefix of the previous round
    followed by the constant x_k = point + side*2^(1-k) and waits for an
    output <= (2*limit + y)/3 at an index beyond the previous commit.
    LIMIT_LOWER1: same inputs; the commit must lie in output row k.
    LOWER1_LOWER1: with a < b from the target pair, round 1 feeds the
    all-b array; every later input makes the rows up to the read frontier
    end in a beyond the columns read so far, keeping later rows at b.  The
    commit is an entry <= (2f(b) + f(a))/3 in output row k.

    The final input continues the last prefix as a name of the limit
    point; its replay must keep all R commits.
    """
    variant = Variant(variant)
    if variant not in ROUND_VARIANTS:
        raise ValueError("%s is not a round variant" % variant.value)
    if rounds < 1:
        raise ValueError("at least one round is needed")
    _check_tags(claim, variant)
    f = claim.target
    runs = []
    commits = []
    traces = []

    if variant is Variant.LOWER1_LOWER1:
        a, b = f.pair
        c = (2 * f(b) + f(a)) / 3
        goal = a
        thresholds = []
        for k in range(1, rounds + 1):
            desc = rows_input(a, b, thresholds, False)
            trace, hit = _run_until(
                claim, desc, lambda i, v, k=k: v <= c and tuple_unpair(i, 2)[0] == k, max_steps)
            traces.append(trace)
            if not hit:
                return NonProductive("round %d never committed" % k, traces, k, desc)
            m = len(trace.emitted) - 1
            commits.append(m)
            _record(runs, desc, trace, "round %d" % k)
            read = [tuple_unpair(l, 2) for l in range(trace.read_at_emit[m])]
            prev_i, prev_j = thresholds[-1] if thresholds else (-1, 0)
            i_k = max([prev_i + 1] + [i for i, _ in read])
            j_k = max([prev_j] + [j for _, j in read])
            thresholds.append((i_k, j_k))
        final = rows_input(a, b, thresholds, True)
    else:
        y = f(f.point)
        if f.limit is None:
            raise ValueError("target needs a limit value for %s" % variant.value)
        c = (2 * f.limit + y) / 3
        goal = f.point
        prefix = []
        n_prev = -1
        for k in range(1, rounds + 1):
            desc = prefix_input(prefix, f.approach(k - 1))
            if variant is Variant.LIMIT_LIMIT:
                last = commits[-1] if commits else -1
                stop = lambda i, v, last=last: i > last and v <= c
            else:
                stop = lambda i, v, k=k: v <= c and tuple_unpair(i, 2)[0] == k
            trace, hit = _run_until(claim, desc, stop, max_steps)
            traces.append(trace)
            if not hit:
                return NonProductive("round %d never committed" % k, traces, k, desc)
            m = len(trace.emitted) - 1
            commits.append(m)
            _record(runs, desc, trace, "round %d" % k)
            n_k = max(trace.read_at_emit[m], n_prev + 1)
            name = build_input(desc, claim.in_tag)
            prefix = [name[n] for n in range(n_k)]
            n_prev = n_k
        final = prefix_input(prefix, goal)

    t_final = run(claim.transformer, build_input(final, claim.in_tag), max_steps=max_steps,
                  max_emits=max(commits) + 1)
    rf = _record(runs, final, t_final, "limit")
    if len(t_final.emitted) <= max(commits):
        return Refuted("limit run stopped early", traces + [t_final])
    pred = {"all": [{"valid": rf}, _cmp("eq", {"point": rf}, _lit(goal)),
                    _cmp("gt", {"f": {"point": rf}}, _lit(c))]
            + [_cmp("le", {"emit": [rf, m]}, _lit(c)) for m in commits]}
    cert = _certificate(claim, variant, runs, pred, rounds, c)
    return cert or Refuted("commits do not contradict the target", traces + [t_final])


def attack(claim, variant, rounds=6, max_steps=10 ** 5):
    variant = Variant(variant)
    if variant in SWAP_VARIANTS:
        return adv_prefix_swap(claim, variant, max_steps)
    return adv_omega_rounds(claim, variant, rounds, max_steps)


# -- verification ------------------------------------------------------------------------------------

class VerifyError(ValueError):
    pass


def verify_certificate(data, resolve):
    """Replay a certificate.  ``resolve(source, in_tag, out_tag)`` returns
    the transformer named by the certificate (and may raise for unknown
    registry ids).  Returns (ok, message)."""
    if data.get("format") != FORMAT:
        return False, "unknown certificate format"
    in_tag = ReprTag.from_json(data["in_tag"])
    out_tag = ReprTag.from_json(data["out_tag"])
    target = Target.from_json(data["target"])
    t = resolve(data["claimant"], in_tag, out_tag)
    runs = []
    for k, rec in enumerate(data["runs"]):
        recorded = Trace.from_json(rec["trace"])
        replay = run(t, build_input(rec["input"], in_tag), max_steps=recorded.steps,
                     max_emits=len(recorded.emitted))
        if replay.to_json() != rec["trace"]:
            return False, "run %d does not replay" % k
        runs.append({"input": rec["input"], "trace": recorded})
    ctx = {"runs": runs, "target": target, "in_tag": in_tag}
    try:
        ok = holds(data["predicate"], ctx)
    except (PredicateError, KeyError, IndexError, TypeError, ValueError) as err:
        return False, "predicate error: %s" % err
    return (True, "ok") if ok else (False, "predicate does not hold")

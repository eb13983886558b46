"""Functions on [0, 1] named by sequences of rational polynomials.

    FAST    ||f - P_n|| <= 2^-n
    LIMIT   P_n -> f uniformly, no rate
    DOUBLE  f = ulim_i ulim_j P<i,j>

Norms are sup norms on [0, 1].  Values only available in the limit are
modeled as stabilizing streams: v(n, s) is the stage-s guess for item n
and settles after finitely many stages.
"""

import enum
import json
import threading
from math import isqrt

from .exactnum import ONE, ZERO, Q, format_rational, parse_rational, pow2, tuple_unpair
from .lifting import RationalEvaluator
from .machine import Indexwise, apply
from .names import FAST


class RationalPolynomial:
    """Exact polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = [Q(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RationalPolynomial([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                                   for i in range(n)])

    def __neg__(self):
        return RationalPolynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RationalPolynomial):
            return RationalPolynomial([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return RationalPolynomial()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, RationalPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self):
        return RationalPolynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def to_json(self):
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, obj):
        return cls([parse_rational(v) for v in obj])

    def __repr__(self):
        return "RationalPolynomial(%s)" % ", ".join(format_rational(c) for c in self.coeffs)


X = RationalPolynomial([0, 1])


def load_polynomial(text):
    return RationalPolynomial.from_json(json.loads(text))


# -- sup norm ------------------------------------------------------------------------------

def sup_norm_bounds(P, k):
    """(lo, hi) with lo <= max_[0,1] |P| <= hi and hi - lo <= 2^-k.

    lo is the maximum over the dyadic grid of mesh 2^-g; every point of
    [0, 1] lies within 2^-g/2 of a grid point, so with L the coefficient
    sum of |P'| the grid maximum plus L*2^-g/2 bounds the norm.  hi is
    the smallest such bound over all coarser grids, so the brackets for
    larger k nest inside those for smaller k.
    """
    L = sum((abs(c) for c in P.derivative().coeffs), ZERO)
    g = 0
    while L * pow2(-g) / 2 > pow2(-k):
        g += 1
    lo = max(abs(P(ZERO)), abs(P(ONE)))
    hi = lo + L / 2
    for level in range(1, g + 1):
        step = pow2(-level)
        for i in range(1, 2 ** level, 2):
            v = abs(P(i * step))
            if v > lo:
                lo = v
        hi = min(hi, lo + L * step / 2)
    return lo, hi


def _divmod(a, b):
    # long division of coefficient lists, lowest degree first
    a = list(a)
    q = [ZERO] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] / b[-1]
        q[k] = c
        for i, v in enumerate(b):
            a[i + k] -= c * v
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _gcd(a, b):
    while b:
        a, b = b, _divmod(a, b)[1]
    return a


def _squarefree(P):
    g = _gcd(P.coeffs, P.derivative().coeffs)
    return RationalPolynomial(_divmod(P.coeffs, g)[0])


def _sturm(P):
    seq = [P.coeffs, P.derivative().coeffs]
    while seq[-1]:
        r = _divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [RationalPolynomial(c) for c in seq]


def _variations(seq, x):
    signs = [v > 0 for v in (p(x) for p in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _side_sign(P, x, right):
    # sign of P just right (or left) of x: first nonzero derivative
    k = 0
    while True:
        v = P(x)
        if v != 0:
            return (1 if v > 0 else -1) * (1 if right or k % 2 == 0 else -1)
        P = P.derivative()
        k += 1


def nonnegative_on_unit(P):
    """Exact test that P >= 0 on [0, 1].

    The distinct roots in (0, 1) are isolated with a Sturm sequence of
    the squarefree part; the sign is constant on each open piece between
    roots and is read off at a rational point or, next to a rational
    root, from the first nonzero derivative.
    """
    if not P.coeffs:
        return True
    if P(ZERO) < 0 or P(ONE) < 0:
        return False
    if P.degree == 0:
        return True
    h = _squarefree(P)
    seq = _sturm(h)

    def roots_inside(a, b):
        return _variations(seq, a) - _variations(seq, b) - (1 if h(b) == 0 else 0)

    todo = [(ZERO, ONE)]
    while todo:
        a, b = todo.pop()
        n = roots_inside(a, b)
        if n == 0:
            if P((a + b) / 2) < 0:
                return False
        elif n == 1:
            left = P(a) if P(a) != 0 else _side_sign(P, a, True)
            right = P(b) if P(b) != 0 else _side_sign(P, b, False)
            if left < 0 or right < 0:
                return False
        else:
            m = (a + b) / 2
            if P(m) < 0:
                return False
            todo += [(a, m), (m, b)]
    return True


def norm_at_most(P, bound):
    """Exact test of ||P|| <= bound on [0, 1]."""
    bound = Q(bound)
    c = RationalPolynomial([bound])
    return nonnegative_on_unit(c - P) and nonnegative_on_unit(c + P)


# -- polynomial names ---------------------------------------------------------------------

class Level(enum.Enum):
    FAST = "FAST"
    LIMIT = "LIMIT"
    DOUBLE = "DOUBLE"


class WeierstrassName:
    """Lazily indexed polynomials.  ``polys(n)`` for FAST and LIMIT names,
    ``polys(i, j)`` for DOUBLE names; results are memoized."""

    def __init__(self, level, polys, label=""):
        self.level = Level(level)
        self._polys = polys
        self.label = label
        self._memo = {}
        self._lock = threading.Lock()

    def __call__(self, *idx):
        with self._lock:
            p = self._memo.get(idx)
        if p is None:
            p = self._polys(*idx)
            with self._lock:
                self._memo[idx] = p
        return p

    def __getitem__(self, n):
        if self.level is Level.DOUBLE:
            return self(*tuple_unpair(n, 2))
        return self(n)

    def prefix_json(self, n):
        return [self[i].to_json() for i in range(n)]


def constant_name(P, level=Level.LIMIT):
    if Level(level) is Level.DOUBLE:
        return WeierstrassName(level, lambda i, j: P, "constant")
    return WeierstrassName(level, lambda n: P, "constant")


def _weier_eval(fname):
    return lambda view, n, cache: fname(n)(view[n])


def weier_eval_transformer(fname):
    """p_n = Q_n(q_n): a limit name of f and a limit name of x give a
    limit name of f(x), for x in [0, 1]."""
    if fname.level is Level.DOUBLE:
        raise ValueError("weier_eval_prime takes a FAST or LIMIT name")
    return Indexwise(_weier_eval(fname), FAST(1), FAST(1), "weier-eval")


def weier_eval_prime(fname, name):
    return apply(weier_eval_transformer(fname), name)


# -- Bernstein approximations -----------------------------------------------------------------

def _binomials(n):
    row = [1]
    for k in range(n):
        row.append(row[-1] * (n - k) // (k + 1))
    return row


def bernstein(f, n):
    """B_n f = sum_k f(k/n) C(n,k) X^k (1-X)^(n-k), exactly."""
    if n < 1:
        return RationalPolynomial([f(ZERO)])
    out = RationalPolynomial()
    binom = _binomials(n)
    one_minus = RationalPolynomial([1, -1])
    powers_x = [RationalPolynomial([1])]
    powers_1x = [RationalPolynomial([1])]
    for _ in range(n):
        powers_x.append(powers_x[-1] * X)
        powers_1x.append(powers_1x[-1] * one_minus)
    for k in range(n + 1):
        v = Q(f(Q(k) / n))
        if v:
            out = out + powers_x[k] * powers_1x[n - k] * (v * binom[k])
    return out


def hat(t):
    """Piecewise linear hat on [0, 1] with peak 1 at 1/2, zero elsewhere."""
    t = Q(t)
    if t <= 0 or t >= 1:
        return ZERO
    return 1 - abs(2 * t - 1)


def bernstein_error_bound(lipschitz, n):
    """Rational upper bound for |B_n f - f| when f is Lipschitz with the
    given constant: L * sqrt(x(1-x)/n) <= L / (2 sqrt(n))."""
    r = isqrt(n)
    return Q(lipschitz) / (2 * r)


def bernstein_name(f, degree=lambda m: m + 1, label="bernstein"):
    return WeierstrassName(Level.LIMIT, lambda m: bernstein(f, degree(m)), label)


# -- stabilizing streams --------------------------------------------------------------------

class StabilizingStream:
    """v(n, s): the stage-s value of item n, eventually constant in s.

    ``settle`` (optional) records for synthetic instances the stage after
    which item n no longer changes.
    """

    def __init__(self, fn, settle=None, label=""):
        self.fn = fn
        self.settle = settle
        self.label = label

    def __call__(self, n, s):
        return self.fn(n, s)

    def last_change(self, n, horizon):
        """Last stage <= horizon at which item n changed (0 if never)."""
        last = 0
        prev = self.fn(n, 0)
        for s in range(1, horizon + 1):
            v = self.fn(n, s)
            if v != prev:
                last = s
                prev = v
        return last

    def mind_changes(self, n, horizon):
        count = 0
        prev = self.fn(n, 0)
        for s in range(1, horizon + 1):
            v = self.fn(n, s)
            if v != prev:
                count += 1
                prev = v
        return count


def limitlemma_wrap(v, settle=None):
    """Package a stream of current guesses as a StabilizingStream.

    ``v`` is either fn(n, s), or a one-argument fn(s) / sequence for a
    single item (then n is ignored).
    """
    if callable(v):
        try:
            v(0, 0)
            fn = v
        except TypeError:
            fn = lambda n, s: v(s)
    else:
        fn = lambda n, s: v[s]
    return StabilizingStream(fn, settle)


def limitlemma_read(stream, n, stage):
    return stream(n, stage)


def from_changes(initial, changes):
    """Single-item stream: ``initial`` until the first stage listed in
    ``changes`` ({stage: value}), then the latest listed value."""
    stages = sorted(changes)

    def fn(n, s):
        v = initial
        for t in stages:
            if t > s:
                break
            v = changes[t]
        return v

    return StabilizingStream(fn, lambda n: stages[-1] if stages else 0)


# -- fast subsequence of a doubly indexed name ---------------------------------------------------

def fastsub_extract(Qn, n, horizon):
    """Stage-wise candidates m^(s), s = 0..horizon, for row n of ``Qn``.

    m^(s) is the least m <= s with ||Q<n,k> - Q<n,l>|| <= 2^-n proved
    for all k, l in [m, s].  The candidates never decrease; on a row
    that converges uniformly they stabilize, and the stable value passes
    every pairwise check made up to the horizon.
    """
    bound = pow2(-n)
    polys = []
    m = 0
    stages = []
    for s in range(horizon + 1):
        polys.append(Qn(n, s))
        for k in range(s - 1, m - 1, -1):
            if not norm_at_most(polys[k] - polys[s], bound):
                m = k + 1
                break
        stages.append(m)
    return stages


def fastsub_stream(Qn):
    """The candidates of ``fastsub_extract`` as a StabilizingStream."""
    cache = {}

    def fn(n, s):
        got = cache.get(n)
        if got is None or len(got) <= s:
            got = cache[n] = fastsub_extract(Qn, n, max(s, 2 * len(got or [])))
        return got[s]

    return StabilizingStream(fn)


class SyntheticRow:
    """Row n of a doubly indexed name that settles at a recorded stage.

    Before ``settle`` the entries alternate P + 2^(1-n) X and
    P - 2^(1-n) X; from ``settle`` on they are P + 2^(-n-2-m) X, which
    pairwise differ by at most 2^-n.
    """

    def __init__(self, base, n, settle):
        self.base = base
        self.n = n
        self.settle = settle

    def __call__(self, m):
        if m < self.settle:
            sign = 1 if m % 2 == 0 else -1
            return self.base + X * (sign * pow2(1 - self.n))
        return self.base + X * pow2(-self.n - 2 - m)


# -- pulses ---------------------------------------------------------------------------------

class SlowEnumeration:
    """An injective h: N -> N whose value h(m) becomes known at stage delay(m)."""

    def __init__(self, values, delay=lambda m: 0, label="enumeration"):
        self.values = values
        self.delay = delay
        self.label = label

    def __call__(self, m):
        return self.values(m)

    def known(self, m, stage):
        return self.delay(m) <= stage


def _pulse_level(x):
    # the m >= 1 with 2^-m < x < 2^(1-m), or None
    if x <= 0 or x >= 1:
        return None
    m = 1
    while x <= pow2(-m):
        m += 1
    return m if x < pow2(1 - m) else None


def pulse_value(h_enum, x, depth, stage=None):
    """sum_{m=1}^{depth} a_m hat(2^m x - 1), a_m = 2^-h(m); only the term
    whose support contains x can be nonzero.  With ``stage`` set, terms
    whose coefficient is not yet known count as 0."""
    x = Q(x)
    m = _pulse_level(x)
    if m is None or m > depth:
        return ZERO
    if stage is not None and not h_enum.known(m, stage):
        return ZERO
    return pow2(-h_enum(m)) * hat(pow2(m) * x - 1)


def _pulse_diagonal(h_enum):
    def fn(view, M, cache):
        return pulse_value(h_enum, view[M], M, stage=M)
    return fn


def pulse_construct(h_enum, depth):
    """Returns (evaluator of the depth-truncated sum, FAST(1) -> FAST(1)
    transformer emitting p_M = f_M(q_M) with the coefficients known at
    stage M)."""
    f = lambda x: pulse_value(h_enum, x, depth)
    evaluator = RationalEvaluator.from_exact(f, "pulses(%d)" % depth)
    t = Indexwise(_pulse_diagonal(h_enum), FAST(1), FAST(1), "pulses")
    return evaluator, t

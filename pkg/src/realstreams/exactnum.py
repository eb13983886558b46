"""Exact rationals and the index pairing used by every multi-indexed stream.

All numbers in the core are ``fractions.Fraction``.  The text form is
``p/q`` with the sign carried by ``p`` and ``q`` always positive, so 5
is written ``5/1``.
"""

import threading
from fractions import Fraction
from math import isqrt

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def Q(value):
    """Coerce ints, Fractions and ``p/q`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError("not an exact rational: %r" % (value,))


def parse_rational(text):
    """Parse the ``p/q`` wire form.  Plain integers are accepted too."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational")
    if "/" in s:
        num, _, den = s.partition("/")
        p, q = int(num), int(den)
        if q <= 0:
            raise ValueError("denominator must be positive: %r" % text)
        return Fraction(p, q)
    return Fraction(int(s))


def format_rational(x):
    x = Q(x)
    return "%d/%d" % (x.numerator, x.denominator)


def pow2(n):
    """2**n as an exact rational, for any integer n."""
    if n >= 0:
        return Fraction(1 << n)
    return Fraction(1, 1 << -n)


def cantor_pair(i, j):
    if i < 0 or j < 0:
        raise ValueError("pairing is defined on naturals")
    s = i + j
    return s * (s + 1) // 2 + j


def cantor_unpair(n):
    if n < 0:
        raise ValueError("pairing is defined on naturals")
    w = (isqrt(8 * n + 1) - 1) // 2
    j = n - w * (w + 1) // 2
    return w - j, j


def tuple_pair(*idx):
    """Left-associated tupling: <a,b,c> = <<a,b>,c>.  A 1-tuple is itself."""
    if not idx:
        raise ValueError("need at least one index")
    n = idx[0]
    for k in idx[1:]:
        n = cantor_pair(n, k)
    return n


def tuple_unpair(n, d):
    """Inverse of tuple_pair for d-tuples."""
    if d < 1:
        raise ValueError("arity must be positive")
    out = []
    for _ in range(d - 1):
        n, last = cantor_unpair(n)
        out.append(last)
    out.append(n)
    out.reverse()
    return tuple(out)


def clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def rationals():
    """Canonical enumeration of all of Q, each value exactly once.

    Order: by height |p| + q, then by value, over reduced p/q.
    """
    yield ZERO
    h = 2
    while True:
        batch = []
        for q in range(1, h):
            p = h - q
            x = Fraction(p, q)
            if x.denominator == q:
                batch.append(-x)
                batch.append(x)
        batch.sort()
        for x in batch:
            yield x
        h += 1


class RationalList:
    """Memoized random access into ``rationals()``."""

    def __init__(self):
        self._items = []
        self._gen = rationals()
        self._lock = threading.Lock()

    def __getitem__(self, i):
        if i < len(self._items):
            return self._items[i]
        with self._lock:
            while len(self._items) <= i:
                self._items.append(next(self._gen))
        return self._items[i]


RATIONALS = RationalList()

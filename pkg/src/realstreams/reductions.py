"""Deterministic conversions between representations, as transformers.

    join_lt_gt_to_rho   LOWER(0) + UPPER(0) -> FAST(0)
    RHO_TO_LT           p_n = q_n - 2^-n
    RHO_TO_GT           p_n = q_n + 2^-n
    LT_TO_RHO1          p_n = max(q_0..q_n)
    RHO1_TO_LT1         r<i,j> = q_max(i,j), row-normalized
    LIMINF -> LOWER(1)  same construction as RHO1_TO_LT1
    LOWER(1) -> LIMINF  staged emission, see docs/derivations.md
    join_level1         LOWER(1) + UPPER(1) -> FAST(1), see docs/derivations.md

Two-input machines read an interleaved stream (``names.interleave``).
"""

import enum

from .exactnum import pow2, tuple_pair, tuple_unpair
from .machine import READ, Emit, Indexwise, Program, Tape, apply
from .names import (FAST, LIMINF, LIMINF_STRICT, LOWER, UPPER, PairTag,
                    TagMismatch, interleave)


class Edge(enum.Enum):
    RHO_TO_LT = "rho-to-lt"
    RHO_TO_GT = "rho-to-gt"
    LT_TO_RHO1 = "lt-to-rho1"
    RHO1_TO_LT1 = "rho1-to-lt1"


# -- row normalization -------------------------------------------------------------

class RowNormalizer:
    """t<i,j> = max_{i'<=i} min_{j'<=j} u<i',j'> over a double-indexed input.

    ``get(i, j)`` supplies u.  The running minimum along each row comes
    first, so t is nonincreasing in j and nondecreasing in i, and
    inf_j t<i,j> = max_{i'<=i} inf_j u<i',j>.  For rows that are already
    nonincreasing this is the plain running maximum over rows.

    With sign=-1 the dual is computed: min over rows of running maxima.
    Entries are appended only after they are computed, so a ``get``
    that raises (for missing input) leaves the tables consistent.
    """

    def __init__(self, get, sign=1):
        self.get = get
        self.sign = sign
        self.rowmin = []   # rowmin[i][j]: running min of sign*u along row i
        self.col = {}      # col[j][i]: t<i,j> times sign

    def _rowmin(self, i, j):
        while len(self.rowmin) <= i:
            self.rowmin.append([])
        row = self.rowmin[i]
        while len(row) <= j:
            v = self.sign * self.get(i, len(row))
            row.append(v if not row or v < row[-1] else row[-1])
        return row[j]

    def __call__(self, i, j):
        col = self.col.setdefault(j, [])
        while len(col) <= i:
            v = self._rowmin(len(col), j)
            col.append(v if not col or v > col[-1] else col[-1])
        return self.sign * col[i]


# -- single-input edges -------------------------------------------------------------

def rho_to_lt():
    return Indexwise(lambda v, n, c: v[n] - pow2(-n), FAST(0), LOWER(0), "rho-to-lt")


def rho_to_gt():
    return Indexwise(lambda v, n, c: v[n] + pow2(-n), FAST(0), UPPER(0), "rho-to-gt")


def _running_max(view, n, cache):
    best = cache.setdefault("max", [])
    while len(best) <= n:
        q = view[len(best)]
        best.append(q if not best or q > best[-1] else best[-1])
    return best[n]


def lt_to_rho1():
    return Indexwise(_running_max, LOWER(0), FAST(1), "lt-to-rho1")


def _liminf_to_sup_inf(view, n, cache):
    norm = cache.get("norm")
    if norm is None:
        norm = cache["norm"] = RowNormalizer(lambda i, j: view[max(i, j)])
    i, j = tuple_unpair(n, 2)
    return norm(i, j)


def rho1_to_lt1():
    return Indexwise(_liminf_to_sup_inf, FAST(1), LOWER(1), "rho1-to-lt1")


def liminf_to_lt1(strict=False):
    src = LIMINF_STRICT if strict else LIMINF
    return Indexwise(_liminf_to_sup_inf, src, LOWER(1), "liminf-to-lt1")


_EDGES = {
    Edge.RHO_TO_LT: rho_to_lt,
    Edge.RHO_TO_GT: rho_to_gt,
    Edge.LT_TO_RHO1: lt_to_rho1,
    Edge.RHO1_TO_LT1: rho1_to_lt1,
}


def edge_transformer(edge):
    return _EDGES[Edge(edge)]()


def _check_tag(name, expected):
    if name.tag != expected:
        raise TagMismatch("expected a %s name, got %s" % (expected, name.tag))


def weaken(name, edge):
    t = edge_transformer(edge)
    _check_tag(name, t.in_tag)
    return apply(t, name)


# -- joins -----------------------------------------------------------------------------

def _join0_body():
    # even reads are lower entries, odd reads upper entries
    lo = hi = None
    n = 0
    while True:
        while lo is None or hi - lo >= 2 * pow2(-n):
            a = yield READ
            b = yield READ
            lo = a if lo is None or a > lo else lo
            hi = b if hi is None or b < hi else hi
        yield Emit((lo + hi) / 2)
        n += 1


def join_lt_gt_transformer():
    """Midpoint of running max of the lower and running min of the upper
    name, emitted once the gap is below 2^(1-n).  Reads without bound
    when the two names disagree."""
    return Program(_join0_body, PairTag(LOWER(0), UPPER(0)), FAST(0), "lt+gt-to-rho")


def join_lt_gt_to_rho(lower, upper):
    _check_tag(lower, LOWER(0))
    _check_tag(upper, UPPER(0))
    return apply(join_lt_gt_transformer(), interleave(lower, upper))


def _join1_body():
    tape = Tape()
    lo = RowNormalizer(lambda i, j: tape[2 * tuple_pair(i, j)])
    hi = RowNormalizer(lambda i, j: tape[2 * tuple_pair(i, j) + 1], sign=-1)
    s = 0
    while True:
        yield from tape.upto(2 * tuple_pair(s, s) + 1)
        k = 0
        for m in range(s, -1, -1):
            if lo(m, s) <= hi(m, s) + pow2(-m):
                k = m
                break
        yield Emit((lo(k, s) + hi(k, s)) / 2)
        s += 1


def join_level1_transformer():
    """Stage s: take the largest row k <= s whose normalized lower entry
    is at most the normalized upper entry plus 2^-k, emit the midpoint."""
    return Program(_join1_body, PairTag(LOWER(1), UPPER(1)), FAST(1), "lt1+gt1-to-rho1")


def join_level1(lower, upper):
    _check_tag(lower, LOWER(1))
    _check_tag(upper, UPPER(1))
    return apply(join_level1_transformer(), interleave(lower, upper))


# -- sup-inf to liminf ---------------------------------------------------------------

def _lt1_to_liminf_body():
    tape = Tape()
    t = RowNormalizer(lambda i, j: tape[tuple_pair(i, j)])
    last = []      # last emitted value of each row
    count = []     # number of emissions of each row
    s = 0
    while True:
        last.append(None)
        count.append(0)
        reach = max(m + count[m] for m in range(s + 1))
        yield from tape.upto(tuple_pair(reach, s))
        for m in range(s + 1):
            e = max(t(m + j, s) - 1 + pow2(-j) for j in range(count[m] + 1))
            if last[m] is None or e <= last[m] - pow2(-m):
                last[m] = e
                count[m] += 1
                yield Emit(e)
        s += 1


def lt1_to_liminf():
    """Each row m re-emits its bound only after it dropped by 2^-m; the
    bound also looks at higher rows so rows with infimum -inf stop too."""
    return Program(_lt1_to_liminf_body, LOWER(1), LIMINF, "lt1-to-liminf")


def liminf_normalize(name, target=None):
    """LIMINF or LIMINF_STRICT -> LOWER(1), or LOWER(1) -> LIMINF."""
    if name.tag in (LIMINF, LIMINF_STRICT):
        if target not in (None, LOWER(1)):
            raise TagMismatch("liminf names convert to LOWER(1) only")
        return apply(liminf_to_lt1(name.tag == LIMINF_STRICT), name)
    if name.tag == LOWER(1):
        if target not in (None, LIMINF):
            raise TagMismatch("LOWER(1) names convert to LIMINF only")
        return apply(lt1_to_liminf(), name)
    raise TagMismatch("no liminf conversion from %s" % name.tag)

"""Built-in transformers and claimants, looked up by id.

Nothing is loaded dynamically: a machine is either listed here or runs
as a subprocess over the line protocol.
"""

from dataclasses import dataclass

from .adversary import FLIPPED_HEAVISIDE, HEAVISIDE, ClaimSpec, Variant, custom_target
from .exactnum import ONE, ZERO, pow2, tuple_pair, tuple_unpair
from .hotz import HOTZ_TO_RHO1, RHO_TO_HOTZ, heaviside_hotz, restart_lift, square_machine
from .lifting import h_bar, heaviside_lt, heaviside_lt1
from .machine import ExternalTransformer, Indexwise, compose
from .names import FAST, HOTZ, LOWER
from .nondet import nd_binary, nd_fast_subsequence, nd_level_down
from .reductions import (RowNormalizer, join_level1_transformer, join_lt_gt_transformer,
                         liminf_to_lt1, lt1_to_liminf, lt_to_rho1, rho1_to_lt1, rho_to_gt,
                         rho_to_lt)


class UnknownId(KeyError):
    pass


# -- conversion edges ---------------------------------------------------------------------

DETERMINISTIC = {
    "rho-to-lt": rho_to_lt,
    "rho-to-gt": rho_to_gt,
    "lt-to-rho1": lt_to_rho1,
    "rho1-to-lt1": rho1_to_lt1,
    "liminf-to-lt1": liminf_to_lt1,
    "lt1-to-liminf": lt1_to_liminf,
    "lt+gt-to-rho": join_lt_gt_transformer,
    "lt1+gt1-to-rho1": join_level1_transformer,
    "square": square_machine,
    "restart-square": lambda: restart_lift(square_machine()),
    "heaviside-hotz": heaviside_hotz,
}

# edges that only change the tag
RETAG = {
    RHO_TO_HOTZ: (FAST(0), HOTZ),
    HOTZ_TO_RHO1: (HOTZ, FAST(1)),
}

NONDETERMINISTIC = {
    "rho1-to-rho": nd_fast_subsequence,
    "rho2-to-rho1": lambda: nd_level_down(1),
    "rho-to-binary": nd_binary,
}

TWO_INPUT = {"lt+gt-to-rho", "lt1+gt1-to-rho1"}


def edge_kind(edge):
    if edge in DETERMINISTIC:
        return "deterministic"
    if edge in RETAG:
        return "retag"
    if edge in NONDETERMINISTIC:
        return "nondeterministic"
    return None


# -- claimants -----------------------------------------------------------------------------

def _threshold_heaviside():
    # decides h from q_5 alone
    return Indexwise(lambda v, n, c: ONE if v[5] > pow2(-5) else ZERO,
                     FAST(0), FAST(0), "threshold-heaviside")


def _threshold_flipped():
    return Indexwise(lambda v, n, c: ONE if v[5] <= pow2(-5) else ZERO,
                     FAST(0), LOWER(0), "threshold-flipped")


def _one_minus_max(view, n, cache):
    best = cache.setdefault("max", [])
    while len(best) <= n:
        q = view[len(best)]
        best.append(q if not best or q > best[-1] else best[-1])
    return 1 - best[n]


def _nonmonotone_sup():
    return Indexwise(_one_minus_max, LOWER(0), LOWER(0), "one-minus-sup")


def _limit_decider():
    return Indexwise(lambda v, n, c: h_bar(v[9]), FAST(1), FAST(1), "limit-decider")


def _liminf_flipped(view, n, cache):
    i, j = tuple_unpair(n, 2)
    return h_bar(view[max(i, j)])


def _liminf_flipped_lt1():
    return Indexwise(_liminf_flipped, FAST(1), LOWER(1), "liminf-flipped")


def _one_minus_rows(view, n, cache):
    norm = cache.get("norm")
    if norm is None:
        norm = cache["norm"] = RowNormalizer(lambda i, j: view[tuple_pair(i, j)])
    i, j = tuple_unpair(n, 2)
    return 1 - norm(i, j)


def _nonmonotone_lt1():
    return Indexwise(_one_minus_rows, LOWER(1), LOWER(1), "one-minus-rows")


DECREASING = custom_target({0: 1, 1: 0})


@dataclass(frozen=True)
class Claimant:
    factory: object
    target: object
    variant: Variant
    broken: bool


CLAIMANTS = {
    "threshold-heaviside": Claimant(_threshold_heaviside, HEAVISIDE, Variant.FAST_FAST, True),
    "threshold-flipped": Claimant(_threshold_flipped, FLIPPED_HEAVISIDE, Variant.FAST_LOWER, True),
    "one-minus-sup": Claimant(_nonmonotone_sup, DECREASING, Variant.LOWER_LOWER, True),
    "limit-decider": Claimant(_limit_decider, FLIPPED_HEAVISIDE, Variant.LIMIT_LIMIT, True),
    "liminf-flipped": Claimant(_liminf_flipped_lt1, FLIPPED_HEAVISIDE, Variant.LIMIT_LOWER1, True),
    "one-minus-rows": Claimant(_nonmonotone_lt1, DECREASING, Variant.LOWER1_LOWER1, True),
    "heaviside-lt": Claimant(heaviside_lt, HEAVISIDE, Variant.LOWER_LOWER, False),
    "rho-to-lt;heaviside-lt": Claimant(lambda: compose(rho_to_lt(), heaviside_lt()),
                                       HEAVISIDE, Variant.FAST_LOWER, False),
    "heaviside-lt1": Claimant(heaviside_lt1, HEAVISIDE, Variant.LOWER1_LOWER1, False),
    "rho1-to-lt1;heaviside-lt1": Claimant(lambda: compose(rho1_to_lt1(), heaviside_lt1()),
                                          HEAVISIDE, Variant.LIMIT_LOWER1, False),
}

BROKEN = [k for k, c in CLAIMANTS.items() if c.broken]
CORRECT = [k for k, c in CLAIMANTS.items() if not c.broken]


def claimant(cid):
    try:
        return CLAIMANTS[cid]
    except KeyError:
        raise UnknownId(cid) from None


def claim_for(cid, target=None):
    c = claimant(cid)
    return ClaimSpec(c.factory(), target or c.target, source={"registry": cid})


def external_claim(argv, target, in_tag, out_tag):
    t = ExternalTransformer(argv, in_tag, out_tag)
    return ClaimSpec(t, target, in_tag, out_tag, source={"external": list(argv)})


def resolve(source, in_tag, out_tag):
    """Transformer named by a certificate's claimant field."""
    if "registry" in source:
        return claimant(source["registry"]).factory()
    if "external" in source:
        return ExternalTransformer(source["external"], in_tag, out_tag)
    raise UnknownId(str(source))

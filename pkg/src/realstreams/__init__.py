"""Real numbers as lazy exact rational streams.

Names of reals under several representations, stream machines that
convert between them or evaluate functions, a simulator for
nondeterministic machines, and adversaries that falsify machines
claiming the impossible.
"""

from .exactnum import Q, cantor_pair, cantor_unpair, format_rational, parse_rational, pow2
from .machine import Emit, Guess, Program, Trace, apply, compose, run
from .names import (BINARY, FAST, HOTZ, LIMINF, LOWER, UPPER, Name, ReprTag, Schedule,
                    SyntheticSpec, check_consistency, make_synthetic)

__version__ = "0.1.0"

__all__ = [
    "Q", "cantor_pair", "cantor_unpair", "format_rational", "parse_rational", "pow2",
    "Emit", "Guess", "Program", "Trace", "apply", "compose", "run",
    "BINARY", "FAST", "HOTZ", "LIMINF", "LOWER", "UPPER", "Name", "ReprTag", "Schedule",
    "SyntheticSpec", "check_consistency", "make_synthetic",
]

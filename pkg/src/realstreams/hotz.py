"""Ultimately fast names (HOTZ): |q_n - x| <= 2^-n for all n >= some N.

Finitely many wrong entries in front do not change the denoted real, so
a machine may make finitely many mistakes before settling.  The restart
lift exploits this: it guesses N, checks the guess against what it has
read, and restarts with a larger guess when the check fails.
"""

from .exactnum import pow2
from .machine import ABORT, INTERNAL, READ, Emit, Guess, Indexwise, MachineError, Program
from .names import FAST, HOTZ, TagMismatch


RHO_TO_HOTZ = "rho-to-hotz"
HOTZ_TO_RHO1 = "hotz-to-rho1"

_EMBED = {RHO_TO_HOTZ: (FAST(0), HOTZ), HOTZ_TO_RHO1: (HOTZ, FAST(1))}


def embed(name, edge):
    """Fast names are ultimately fast, ultimately fast names converge:
    both embeddings keep the stream and change the tag."""
    src, dst = _EMBED[edge]
    if name.tag != src:
        raise TagMismatch("%s expects %s, got %s" % (edge, src, name.tag))
    return name.retag(dst)


def _shift_for(bound):
    # smallest s with 2^s >= 2*bound + 1
    s = 0
    while pow2(s) < 2 * bound + 1:
        s += 1
    return s


def _square(view, m, cache):
    shift = cache.get("shift")
    if shift is None:
        shift = cache["shift"] = _shift_for(abs(view[0]) + 1)
    q = view[m + shift]
    return q * q


def square_machine(out_tag=HOTZ):
    """x -> x^2 on fast names.  |x| <= |q_0| + 1 bounds the modulus, so
    p_m = q_n^2 with 2^(n-m) >= 2|q_0| + 3 is within 2^-m of x^2."""
    return Indexwise(_square, FAST(0), out_tag, "square")


def heaviside_hotz():
    """Conservative branching: p_n = 0 if q_n <= 2^-n, else 1."""
    return Indexwise(lambda v, n, c: 0 if v[n] <= pow2(-n) else 1, HOTZ, HOTZ, "heaviside-hotz")


def _restart_body(t, log):
    buf = []          # every input consumed so far
    N = 0             # current hypothesis
    emitted = 0       # outputs of the composite machine
    suppress = 0      # outputs of the current simulation still to discard
    produced = 0      # outputs of the current simulation
    sim_reads = 0     # inputs fed to the current simulation

    def first_violation(lo, k_from):
        # smallest (n, k) with lo <= n < k, k >= k_from, |q_n - q_k| > 2^(1-n)
        for n in range(lo, len(buf)):
            for k in range(max(n + 1, k_from), len(buf)):
                if abs(buf[n] - buf[k]) > pow2(1 - n):
                    return (n, k)
        return None

    ex = t.start()
    reply = None
    try:
        while True:
            action = ex.advance(reply)
            reply = None
            if action is None or action is ABORT:
                raise MachineError("simulated machine stopped")
            if isinstance(action, Guess):
                raise MachineError("restart lift needs a deterministic machine")
            if action is READ:
                want = N + 1 + sim_reads
                restarted = False
                while len(buf) <= want and not restarted:
                    buf.append((yield READ))
                    bad = first_violation(N, len(buf) - 1)
                    while bad is not None:
                        N += 1
                        restarted = True
                        if log is not None:
                            log.append({"N": N, "violation": bad, "emitted": emitted})
                        bad = first_violation(N, 0)
                if restarted:
                    ex.close()
                    ex = t.start()
                    suppress, produced, sim_reads = emitted, 0, 0
                    continue
                reply = buf[want]
                sim_reads += 1
            elif isinstance(action, Emit):
                produced += 1
                if produced <= suppress:
                    if log is not None:
                        log.append({"suppressed": produced - 1, "N": N})
                    yield INTERNAL
                    continue
                emitted += 1
                yield action
            else:
                yield INTERNAL
    finally:
        ex.close()


def restart_lift(t, log=None):
    """Lift a FAST(0) -> HOTZ machine to HOTZ -> HOTZ.

    Under hypothesis N the simulated machine reads q_{N+1}, q_{N+2}, ...
    while every consumed pair k > n >= N is checked for
    |q_n - q_k| <= 2^(1-n).  If that holds for all pairs, the shifted
    stream is a fast name of x.  On a violation N grows by one, the
    simulation restarts, and its first M0 outputs are discarded, M0
    being the number already emitted.  ``log`` (a list) receives the
    restart and suppression events.
    """
    if t.in_tag != FAST(0) or t.out_tag != HOTZ:
        raise TagMismatch("restart lift needs a FAST(0) -> HOTZ machine")
    return Program(_restart_body, HOTZ, HOTZ, "restart(%s)" % t.label, (t, log))

"""Command line front end.

    realstreams gen                 synthetic name file
    realstreams convert             apply a conversion edge
    realstreams eval                evaluate a function on a name
    realstreams nondet              explore a nondeterministic machine
    realstreams adversary           attack a claimant
    realstreams verify-certificate  replay a certificate

Exit codes: 0 success (for adversary: falsified), 1 certificate does not
verify, 2 unreadable input, 3 unsupported edge or tag mismatch, 4 no
surviving path, 5 claim survived the attack, 6 unknown registry id.
"""

import argparse
import json
import os
import shlex
import sys

from . import registry
from .adversary import (FLIPPED_HEAVISIDE, HEAVISIDE, Certificate, NonProductive, Target,
                        Variant, VARIANT_TAGS, attack, verify_certificate)
from .exactnum import parse_rational
from .lifting import TEST_FUNCTIONS, lsc_apply, lsc_name, mlsc_apply, mlsc_name
from .machine import InputFailure, MachineError, apply
from .names import (Kind, Name, NameExhausted, NameFileError, ReprTag, Schedule,
                    SyntheticSpec, TagMismatch, UnsupportedSynthetic, dump_name_file,
                    interleave, load_name_file, make_synthetic)
from .nondet import describe, simulate
from .weierstrass import RationalPolynomial, constant_name, weier_eval_prime

OK, VERIFY_FAILED, PARSE_ERROR, UNSUPPORTED, NO_SURVIVORS, SURVIVED, UNKNOWN_ID = range(7)


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise CliError(PARSE_ERROR, "cannot read %s: %s" % (path, err)) from err


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_name(path, pad_last):
    try:
        tag, params, values = load_name_file(_read_text(path))
    except NameFileError as err:
        raise CliError(PARSE_ERROR, "%s: %s" % (path, err)) from err
    return Name.from_values(values, tag, pad_last=pad_last, label=os.path.basename(path)), params


def _report(args, summary, text):
    if args.format == "json":
        print(json.dumps(summary, sort_keys=True))
    elif text:
        print(text)


def _length(args, default=32):
    return args.length if args.length is not None else (args.budget_emits or default)


def _take(name, n):
    try:
        return name.prefix(n)
    except (NameExhausted, InputFailure) as err:
        raise CliError(PARSE_ERROR, "input exhausted: %s (use --pad-last)" % err) from err
    except MachineError as err:
        raise CliError(PARSE_ERROR, "machine failed: %s" % err) from err


# -- gen ---------------------------------------------------------------------------

def cmd_gen(args):
    try:
        tag = ReprTag(Kind(args.tag), args.level)
        junk_values = None
        if args.junk_values:
            junk_values = tuple(parse_rational(v) for v in args.junk_values.split(","))
        schedule = Schedule(args.approach, args.junk, junk_values, args.settle,
                            args.row_delay, args.row_growth, args.seed)
        spec = SyntheticSpec(parse_rational(args.target), tag, schedule)
    except (ValueError, ZeroDivisionError) as err:
        raise CliError(PARSE_ERROR, str(err)) from err
    try:
        name = make_synthetic(spec)
    except UnsupportedSynthetic as err:
        raise CliError(UNSUPPORTED, str(err)) from err
    n = _length(args, 64)
    params = {"synthetic": spec.to_json(), "horizon": spec.horizon()}
    _write_text(args.output, dump_name_file(name.prefix(n), tag, params))
    _report(args, {"output": args.output, "length": n, "tag": str(tag)},
            "wrote %d entries of a %s name to %s" % (n, tag, args.output))
    return OK


# -- convert -----------------------------------------------------------------------

def cmd_convert(args):
    edge = args.edge
    kind = registry.edge_kind(edge)
    if kind is None:
        raise CliError(UNSUPPORTED, "unsupported edge %r" % edge)
    name, params = _load_name(args.input, args.pad_last)
    n = _length(args)
    if kind == "retag":
        src, dst = registry.RETAG[edge]
        if name.tag != src:
            raise CliError(UNSUPPORTED, "%s expects %s, got %s" % (edge, src, name.tag))
        _write_text(args.output, dump_name_file(_take(name, n), dst, {"edge": edge}))
        _report(args, {"output": args.output, "length": n}, "wrote %s" % args.output)
        return OK
    if kind == "deterministic":
        t = registry.DETERMINISTIC[edge]()
        if edge in registry.TWO_INPUT:
            if not args.input2:
                raise CliError(PARSE_ERROR, "%s needs --input2" % edge)
            other, _ = _load_name(args.input2, args.pad_last)
            name = interleave(name, other)
        if t.in_tag is not None and name.tag != t.in_tag:
            raise CliError(UNSUPPORTED, "%s expects %s, got %s" % (edge, t.in_tag, name.tag))
        out = apply(t, name, max_steps_per_emit=args.budget_steps)
        values = _take(out, n)
        _write_text(args.output, dump_name_file(values, t.out_tag, {"edge": edge}))
        _report(args, {"output": args.output, "length": n}, "wrote %s" % args.output)
        return OK
    m = registry.NONDETERMINISTIC[edge]()
    if name.tag != m.in_tag:
        raise CliError(UNSUPPORTED, "%s expects %s, got %s" % (edge, m.in_tag, name.tag))
    result = simulate(m, name, max_depth=args.depth, max_steps_per_path=args.budget_steps,
                      target_emits=n)
    os.makedirs(args.output, exist_ok=True)
    files = []
    for path, trace in result.surviving:
        fname = "path-%s.jsonl" % ("".join(map(str, path.choices)) or "root")
        params = {"edge": edge, "choices": list(path.choices)}
        _write_text(os.path.join(args.output, fname),
                    dump_name_file(trace.emitted, m.out_tag, params))
        files.append(fname)
    summary = result.to_json()
    summary["files"] = files
    _write_text(os.path.join(args.output, "summary.json"),
                json.dumps(summary, sort_keys=True, indent=1) + "\n")
    _report(args, {"survivors": len(files), "files": files}, describe(result))
    return OK if files else NO_SURVIVORS


# -- eval --------------------------------------------------------------------------

def cmd_eval(args):
    name, _ = _load_name(args.input, args.pad_last)
    n = _length(args)
    try:
        if args.machine:
            if args.machine in registry.CLAIMANTS:
                t = registry.claimant(args.machine).factory()
            elif args.machine in registry.DETERMINISTIC:
                t = registry.DETERMINISTIC[args.machine]()
            else:
                raise CliError(UNKNOWN_ID, "unknown machine %r" % args.machine)
            if t.in_tag is not None and name.tag != t.in_tag:
                raise TagMismatch("%s expects %s, got %s" % (args.machine, t.in_tag, name.tag))
            out = apply(t, name, max_steps_per_emit=args.budget_steps)
            label = args.machine
        elif args.lsc or args.mlsc:
            key = args.lsc or args.mlsc
            if key not in TEST_FUNCTIONS:
                raise CliError(UNKNOWN_ID, "unknown function %r" % key)
            fn = TEST_FUNCTIONS[key]
            if args.lsc:
                out = lsc_apply(lsc_name(fn), name, method=args.method)
            else:
                out = mlsc_apply(mlsc_name(fn), name, method=args.method)
            label = key
        elif args.poly:
            try:
                P = RationalPolynomial.from_json(json.loads(_read_text(args.poly)))
            except (ValueError, TypeError) as err:
                raise CliError(PARSE_ERROR, "%s: %s" % (args.poly, err)) from err
            if name.tag != ReprTag(Kind.FAST, 1):
                raise TagMismatch("polynomial evaluation takes a FAST(1) name")
            out = weier_eval_prime(constant_name(P), name)
            label = "poly"
        else:
            raise CliError(PARSE_ERROR, "give --machine, --lsc, --mlsc or --poly")
    except TagMismatch as err:
        raise CliError(UNSUPPORTED, str(err)) from err
    values = _take(out, n)
    _write_text(args.output, dump_name_file(values, out.tag, {"function": label}))
    _report(args, {"output": args.output, "length": n}, "wrote %s" % args.output)
    return OK


# -- nondet ------------------------------------------------------------------------

def cmd_nondet(args):
    if args.machine not in registry.NONDETERMINISTIC:
        raise CliError(UNKNOWN_ID, "unknown nondeterministic machine %r" % args.machine)
    m = registry.NONDETERMINISTIC[args.machine]()
    name, _ = _load_name(args.input, args.pad_last)
    if name.tag != m.in_tag:
        raise CliError(UNSUPPORTED, "%s expects %s, got %s" % (args.machine, m.in_tag, name.tag))
    result = simulate(m, name, max_depth=args.depth, max_steps_per_path=args.budget_steps,
                      target_emits=args.budget_emits)
    data = result.to_json()
    if args.output:
        _write_text(args.output, json.dumps(data, sort_keys=True, indent=1) + "\n")
    _report(args, data, describe(result))
    return OK if result.surviving else NO_SURVIVORS


# -- adversary ---------------------------------------------------------------------

def _target(spec):
    if spec is None:
        return None
    if spec == "HEAVISIDE":
        return HEAVISIDE
    if spec == "FLIPPED_HEAVISIDE":
        return FLIPPED_HEAVISIDE
    try:
        return Target.from_json(json.loads(_read_text(spec)))
    except (ValueError, KeyError, TypeError) as err:
        raise CliError(PARSE_ERROR, "bad target %s: %s" % (spec, err)) from err


def cmd_adversary(args):
    target = _target(args.target)
    if args.claimant:
        try:
            c = registry.claimant(args.claimant)
        except registry.UnknownId as err:
            raise CliError(UNKNOWN_ID, "unknown claimant %s" % err) from err
        variant = Variant(args.variant) if args.variant else c.variant
        claim = registry.claim_for(args.claimant, target)
    elif args.external:
        if not args.variant or target is None:
            raise CliError(PARSE_ERROR, "external claimants need --variant and --target")
        variant = Variant(args.variant)
        in_tag, out_tag = VARIANT_TAGS[variant]
        claim = registry.external_claim(shlex.split(args.external), target, in_tag, out_tag)
    else:
        raise CliError(PARSE_ERROR, "give --claimant or --external")
    try:
        outcome = attack(claim, variant, rounds=args.rounds, max_steps=args.budget_steps)
    except TagMismatch as err:
        raise CliError(UNSUPPORTED, str(err)) from err
    if isinstance(outcome, Certificate):
        if args.output:
            _write_text(args.output, outcome.dumps())
            text = "falsified: certificate written to %s" % args.output
        else:
            text = "falsified (use -o to save the certificate)"
        _report(args, {"falsified": True, "output": args.output}, text)
        return OK
    summary = {"falsified": False, "reason": outcome.reason,
               "nonproductive": isinstance(outcome, NonProductive)}
    if isinstance(outcome, NonProductive):
        summary["round"] = outcome.round
    _report(args, summary, "claim survived: %s" % outcome.reason)
    return SURVIVED


def cmd_verify(args):
    try:
        data = json.loads(_read_text(args.certificate))
    except ValueError as err:
        raise CliError(PARSE_ERROR, "bad certificate: %s" % err) from err
    try:
        ok, message = verify_certificate(data, registry.resolve)
    except registry.UnknownId as err:
        raise CliError(UNKNOWN_ID, "certificate names unknown claimant %s" % err) from err
    except (KeyError, TypeError, ValueError) as err:
        raise CliError(PARSE_ERROR, "malformed certificate: %s" % err) from err
    except MachineError as err:
        ok, message = False, "replay failed: %s" % err
    _report(args, {"ok": ok, "message": message}, message)
    return OK if ok else VERIFY_FAILED


# -- parser ------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-steps", type=int, default=10 ** 5)
    common.add_argument("--budget-emits", type=int, default=None)
    common.add_argument("--depth", type=int, default=8)
    common.add_argument("--rounds", type=int, default=6)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = argparse.ArgumentParser(prog="realstreams", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a synthetic name")
    g.add_argument("--target", required=True)
    g.add_argument("--tag", required=True, choices=[k.value for k in Kind])
    g.add_argument("--level", type=int, default=None)
    g.add_argument("--approach", default="exact")
    g.add_argument("--junk", type=int, default=0)
    g.add_argument("--junk-values", default=None)
    g.add_argument("--settle", type=int, default=0)
    g.add_argument("--row-delay", type=int, default=0)
    g.add_argument("--row-growth", type=int, default=0)
    g.add_argument("--length", type=int, default=None)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("convert", parents=[common], help="convert a name")
    c.add_argument("--edge", required=True)
    c.add_argument("-i", "--input", required=True)
    c.add_argument("--input2", default=None)
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--length", type=int, default=None)
    c.add_argument("--pad-last", action="store_true")
    c.set_defaults(func=cmd_convert)

    e = sub.add_parser("eval", parents=[common], help="evaluate a function on a name")
    e.add_argument("-i", "--input", required=True)
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--machine", default=None)
    e.add_argument("--lsc", default=None)
    e.add_argument("--mlsc", default=None)
    e.add_argument("--method", choices=("formula", "eventual"), default="formula")
    e.add_argument("--poly", default=None)
    e.add_argument("--length", type=int, default=None)
    e.add_argument("--pad-last", action="store_true")
    e.set_defaults(func=cmd_eval)

    n = sub.add_parser("nondet", parents=[common], help="explore a nondeterministic machine")
    n.add_argument("--machine", required=True)
    n.add_argument("-i", "--input", required=True)
    n.add_argument("-o", "--output", default=None)
    n.add_argument("--pad-last", action="store_true")
    n.set_defaults(func=cmd_nondet)

    a = sub.add_parser("adversary", parents=[common], help="attack a claimant")
    a.add_argument("--claimant", default=None)
    a.add_argument("--external", default=None)
    a.add_argument("--variant", choices=[v.value for v in Variant], default=None)
    a.add_argument("--target", default=None)
    a.add_argument("-o", "--output", default=None)
    a.set_defaults(func=cmd_adversary)

    v = sub.add_parser("verify-certificate", parents=[common], help="replay a certificate")
    v.add_argument("certificate")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print("error: %s" % err, file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``ergodic-lab <subcommand> [options]``.

Exit codes: 0 success (whatever the verdict), 2 parse error,
3 precondition error, 4 numerical failure.
"""

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import fixed_points, involution_values, stable_orbits
from .ergodic import (DiagnosisConfig, DistributionSample, SeminormRequest, TestFunction,
                      WeightedSymbol, cesaro_jets, cesaro_pairing_sequence, condition_traces,
                      diagnose, pairing_values, vanishing_power_check)
from .errors import (ConvergenceError, DomainError, ErgodicLabError,
                     NoBracketError, OrbitEscapeError, OrderCapError, ParseError,
                     PreconditionError)
from .expr import parse
from .intervals import CompactInterval, DomainInterval, check_inside
from .report import csv_text, diagnosis_document, dumps, format_float

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3, 4

DEFAULTS = {
    "phi": "x/2", "weight": "1", "alpha": "1,0", "domain": "-inf,inf", "K": "-1,1,41",
    "smax": 3, "N": 200, "M": 200, "mode": "smooth", "tol": 1e-9, "f": "x", "s": 0, "h": 0,
    "n": 20, "levels": 3, "psi": "exp(-x^2)",
}


class ConfigError(ErgodicLabError):
    """Aggregated configuration problems; ``parse_errors`` selects the exit code."""

    def __init__(self, messages, parse_errors):
        self.messages = messages
        self.parse_errors = parse_errors
        super().__init__("; ".join(messages))


@dataclass
class RunConfig:
    """Validated command-line settings; ``raw`` keeps the text as given."""

    raw: dict
    symbol: WeightedSymbol = None
    K: CompactInterval = None
    exprs: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(self.raw)


def _parse_pair(text, what, errors):
    parts = [p.strip() for p in str(text).split(",")]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        errors.append(f"{what}: cannot read {text!r} as numbers")
        return None
    return vals


def build_config(args) -> RunConfig:
    """Turn parsed arguments into a RunConfig, collecting every violation before failing."""
    errors, parse_failures = [], 0
    raw = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "K_given")}
    cfg = RunConfig(raw)

    for name in ("phi", "weight", "f", "psi", "even_f", "density"):
        text = getattr(args, name, None)
        if text is None:
            continue
        try:
            cfg.exprs[name] = parse(text)
        except ParseError as exc:
            parse_failures += 1
            errors.append(f"--{name.replace('_', '-')} {text!r}: {exc.message} at offset {exc.position}")

    alpha = 1.0
    vals = _parse_pair(args.alpha, "--alpha", errors)
    if vals is not None:
        if len(vals) == 1:
            vals.append(0.0)
        if len(vals) != 2:
            errors.append("--alpha expects 're,im'")
        else:
            alpha = complex(vals[0], vals[1])
            if alpha == 0:
                errors.append("--alpha must be nonzero")

    domain = None
    vals = _parse_pair(args.domain, "--domain", errors)
    if vals is not None:
        if len(vals) != 2:
            errors.append("--domain expects 'lo,hi'")
        elif not vals[0] < vals[1]:
            errors.append(f"--domain: need lo < hi, got {args.domain!r}")
        else:
            domain = DomainInterval(vals[0], vals[1])

    vals = _parse_pair(args.K, "--K", errors)
    if vals is not None:
        if len(vals) not in (2, 3):
            errors.append("--K expects 'a,b[,grid]'")
        else:
            grid = int(vals[2]) if len(vals) == 3 else 41
            if not all(math.isfinite(v) for v in vals[:2]) or vals[0] > vals[1] or grid < 2:
                errors.append(f"--K: need finite a <= b and grid >= 2, got {args.K!r}")
            else:
                cfg.K = CompactInterval(vals[0], vals[1], grid)
                if domain is not None and not check_inside(cfg.K, domain):
                    errors.append(f"--K {cfg.K} is not inside the domain {domain}")

    for name, lo in (("smax", 0), ("N", 1), ("M", 1), ("s", 0), ("h", 0), ("n", 0), ("levels", 1)):
        v = getattr(args, name, None)
        if v is not None and v < lo:
            errors.append(f"--{name} must be >= {lo}, got {v}")
    if getattr(args, "smax", 0) > 12 or getattr(args, "s", 0) > 12:
        errors.append("derivative orders are capped at 12")
    if getattr(args, "h", 0) > getattr(args, "s", 0):
        errors.append(f"--h must not exceed --s ({args.h} > {args.s})")
    if args.tol <= 0:
        errors.append("--tol must be positive")
    for name in ("psi_support", "density_support"):
        text = getattr(args, name, None)
        if text is not None:
            v = _parse_pair(text, f"--{name.replace('_', '-')}", errors)
            if v is not None and (len(v) != 2 or not v[0] <= v[1]):
                errors.append(f"--{name.replace('_', '-')} expects 'a,b' with a <= b")
    if getattr(args, "dirac", None) is not None:
        v = _parse_pair(args.dirac, "--dirac", errors)
        if v is not None and len(v) not in (1, 2):
            errors.append("--dirac expects 'a[,k]'")
    if getattr(args, "density", None) is not None and getattr(args, "density_support", None) is None:
        errors.append("--density needs --density-support")

    if errors:
        raise ConfigError(errors, parse_failures)
    if domain is not None and "phi" in cfg.exprs:
        cfg.symbol = WeightedSymbol(cfg.exprs["phi"], cfg.exprs.get("weight", parse("1")), alpha, domain)
    return cfg


def _interval(text):
    a, b = (float(p) for p in text.split(","))
    return CompactInterval(a, b)


def _write(text, out):
    if out:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------

def cmd_parse_check(cfg, args):
    for name in ("phi", "weight", "f", "psi", "even_f", "density"):
        if name in cfg.exprs and getattr(args, name) is not None:
            print(f"{name}: {cfg.exprs[name]}")
    return EXIT_OK


def _diagnosis_config(cfg, args):
    return DiagnosisConfig(mode=args.mode, real_analytic=args.real_analytic, s_max=args.smax,
                           N=args.N, M=args.M, K=cfg.K, levels=args.levels, tol=args.tol,
                           assume_dense=args.assume_dense)


def cmd_diagnose(cfg, args):
    rep = diagnose(cfg.symbol, _diagnosis_config(cfg, args))
    doc = diagnosis_document(cfg.to_dict(), rep)
    text = dumps(doc)
    if args.out:
        _write(text, args.out)
        print(f"verdict: {rep.verdict}")
        for t in rep.theorem_trail:
            print(f"  [{t.theorem}] {t.rule}")
        for w in rep.warnings:
            print(f"  warning: {w}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _trace_orbit(cfg, args):
    rep = stable_orbits(cfg.symbol.phi, cfg.K, cfg.symbol.domain, args.N)
    rows = []
    lo, hi = math.inf, -math.inf
    for n, (a, b) in enumerate(rep.hull_per_step):
        lo, hi = min(lo, a), max(hi, b)
        rows.append((n, a, b, lo, hi))
    if rep.escaped:
        print(f"escape at step {rep.escape_step}: {rep.witness}", file=sys.stderr)
    return ["n", "hull_min", "hull_max", "union_min", "union_max"], rows


def _trace_cesaro(cfg, args):
    xs = cfg.K.grid()
    jets = cesaro_jets(cfg.symbol, cfg.exprs["f"], args.N, args.s, xs)
    rows = []
    for m in range(args.N):
        for i, x in enumerate(xs):
            v = jets[m, args.s, i]
            rows.append((m + 1, float(x), v.real, v.imag))
    return ["n", "x", "value_re", "value_im"], rows


def _trace_conditions(cfg, args):
    traces = condition_traces(cfg.symbol, cfg.K, args.s, args.N, args.M)
    van = next(t for t in traces if t.kind == "vanishing" and (t.s, t.h) == (args.s, args.h))
    ces = next(t for t in traces if t.kind == "cesaro-bound" and (t.s, t.h) == (args.s, args.h))
    rows = []
    for n in range(1, max(args.N, args.M) + 1):
        a = van.values[n - 1] if n <= args.N else ""
        b = ces.values[n - 1] if n <= args.M else ""
        c = ces.cesaro_sup[n - 1] if n <= args.M else ""
        rows.append((n, a, b, c))
    print(f"vanishing trend: {van.trend}; cesaro-bound trend: {ces.trend}", file=sys.stderr)
    return ["n", "a_n", "cesaro_summand", "cesaro_sup"], rows


def _trace_vanishing(cfg, args):
    t = vanishing_power_check(cfg.symbol, cfg.exprs["f"], SeminormRequest(args.s, cfg.K), args.N)
    print(f"trend: {t.trend}", file=sys.stderr)
    return ["n", "a_n"], [(n + 1, v) for n, v in enumerate(t.values)]


def _distribution(args):
    if args.density is not None:
        return DistributionSample.density(args.density, _interval(args.density_support))
    if args.dirac is not None:
        parts = [float(p) for p in args.dirac.split(",")]
        return DistributionSample.dirac(parts[0], int(parts[1]) if len(parts) > 1 else 0)
    raise PreconditionError("a distribution is required: give --dirac or --density")


def _test_function(cfg, args):
    support = _interval(args.psi_support) if args.psi_support else None
    return TestFunction(cfg.exprs["psi"], support)


def _trace_pairing(cfg, args):
    u = _distribution(args)
    psi = _test_function(cfg, args)
    vals = pairing_values(cfg.symbol, u, psi, args.N)
    means = cesaro_pairing_sequence(cfg.symbol, u, args.N, psi)
    rows = [(0, vals[0].real, vals[0].imag, "", "")]
    rows += [(m, vals[m].real, vals[m].imag, means[m - 1].real, means[m - 1].imag)
             for m in range(1, args.N + 1)]
    return ["m", "pairing_re", "pairing_im", "cesaro_re", "cesaro_im"], rows


TRACES = {"orbit": _trace_orbit, "cesaro": _trace_cesaro, "conditions": _trace_conditions,
          "vanishing": _trace_vanishing, "pairing": _trace_pairing}


def cmd_trace(cfg, args):
    header, rows = TRACES[args.kind](cfg, args)
    _write(csv_text(header, rows), args.out)
    return EXIT_OK


def cmd_involution(cfg, args):
    f = cfg.exprs["even_f"]
    K = cfg.K if args.K_given else CompactInterval(-10.0, 10.0, 1001)
    xs = K.grid()
    ys = involution_values(f, xs, tol=args.tol, strict=True)
    back = involution_values(f, ys, tol=args.tol, strict=True)
    defect = np.abs(back - xs)
    _write(csv_text(["x", "phi", "defect"], zip(xs.tolist(), ys.tolist(), defect.tolist())), args.out)
    print(f"max_defect={format_float(defect.max())}", file=sys.stderr)
    return EXIT_OK


def cmd_fixed_points(cfg, args):
    fps = fixed_points(cfg.symbol.phi, cfg.K, tol=args.tol)
    rows = [(p.x, p.residual, p.tangential, p.bracket[0], p.bracket[1]) for p in fps]
    _write(csv_text(["x", "residual", "tangential", "bracket_lo", "bracket_hi"], rows), args.out)
    return EXIT_OK


def cmd_pair(cfg, args):
    u = _distribution(args)
    psi = _test_function(cfg, args)
    vals = pairing_values(cfg.symbol, u, psi, args.n)
    doc = {"schema": "ergodic-lab/1", "config": cfg.to_dict(), "m": args.n,
           "pairing": complex(vals[args.n]),
           "cesaro_pairing": complex(np.mean(vals[1:])) if args.n >= 1 else None}
    _write(dumps(doc), args.out)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------

def _common(p):
    g = p.add_argument_group("operator")
    g.add_argument("--phi", default=DEFAULTS["phi"], help="symbol φ as an expression in x (default: %(default)s)")
    g.add_argument("--weight", default=DEFAULTS["weight"], help="real weight expression (default: %(default)s)")
    g.add_argument("--alpha", default=DEFAULTS["alpha"], help="complex weight scalar 're,im' (default: %(default)s)")
    g.add_argument("--domain", default=DEFAULTS["domain"], help="open interval X as 'lo,hi', inf allowed (default: %(default)s)")
    g.add_argument("--K", default=None, help=f"compact set 'a,b[,grid]' (default: {DEFAULTS['K']})")
    g = p.add_argument_group("numerics")
    g.add_argument("--smax", type=int, default=DEFAULTS["smax"], help="largest derivative order (default: %(default)s)")
    g.add_argument("--N", type=int, default=DEFAULTS["N"], help="operator powers / steps (default: %(default)s)")
    g.add_argument("--M", type=int, default=DEFAULTS["M"], help="Cesàro terms (default: %(default)s)")
    g.add_argument("--levels", type=int, default=DEFAULTS["levels"], help="rungs of the K-ladder (default: %(default)s)")
    g.add_argument("--mode", choices=("smooth", "distributions"), default=DEFAULTS["mode"],
                   help="space the operator acts on (default: %(default)s)")
    g.add_argument("--real-analytic", action="store_true", help="assert that φ is real analytic")
    g.add_argument("--assume-dense", action="store_true", help="assert that {w != 0} is dense in X")
    g.add_argument("--tol", type=float, default=DEFAULTS["tol"], help="tolerance (default: %(default)s)")
    g.add_argument("--out", default=None, help="output file (default: stdout)")
    g = p.add_argument_group("functions")
    g.add_argument("--f", default=DEFAULTS["f"], help="function acted on (default: %(default)s)")
    g.add_argument("--s", type=int, default=DEFAULTS["s"], help="derivative order for traces (default: %(default)s)")
    g.add_argument("--h", type=int, default=DEFAULTS["h"], help="Bell index h for condition traces (default: %(default)s)")
    g.add_argument("--n", type=int, default=DEFAULTS["n"], help="power for 'pair' (default: %(default)s)")
    g.add_argument("--even-f", default=None, help="even function defining an involution")
    g.add_argument("--psi", default=DEFAULTS["psi"], help="test function ψ (default: %(default)s)")
    g.add_argument("--psi-support", default=None, help="declared support 'a,b' of ψ (default: none)")
    g.add_argument("--dirac", default=None, help="distribution δ_a^(k) as 'a[,k]'")
    g.add_argument("--density", default=None, help="distribution given by a density expression")
    g.add_argument("--density-support", default=None, help="support 'a,b' of the density")


def build_parser():
    parser = argparse.ArgumentParser(prog="ergodic-lab",
                                     description="Numerical diagnostics for weighted composition operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("parse-check", cmd_parse_check, "echo normalized expressions"),
        ("diagnose", cmd_diagnose, "decide mean ergodicity and write a JSON report"),
        ("trace", cmd_trace, "emit a CSV trace"),
        ("involution", cmd_involution, "tabulate the involution built from --even-f"),
        ("fixed-points", cmd_fixed_points, "fixed points of φ on K"),
        ("pair", cmd_pair, "pair C^n u with a test function"),
    ]
    for name, func, helptext in specs:
        p = sub.add_parser(name, help=helptext, description=helptext,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        if name == "trace":
            p.add_argument("kind", choices=sorted(TRACES))
        _common(p)
        p.set_defaults(func=func)
    return parser


def _fail(kind, messages, code):
    sys.stderr.write(dumps({"error": {"kind": kind, "messages": list(messages)}}))
    return code


def _attach_negative_values(parser, argv):
    """Rewrite ``--phi -x`` as ``--phi=-x`` so values may start with a minus sign."""
    takes_value = set()
    for action in parser._subparsers._group_actions[0].choices.values():
        for a in action._actions:
            if a.option_strings and a.nargs is None and not isinstance(
                    a, (argparse._StoreTrueAction, argparse._HelpAction)):
                takes_value.update(a.option_strings)
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in takes_value and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_attach_negative_values(parser, argv))
    args.K_given = args.K is not None
    if args.K is None:
        args.K = DEFAULTS["K"]
    if args.command == "involution" and args.even_f is None:
        return _fail("precondition", ["involution needs --even-f"], EXIT_PRECONDITION)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        code = EXIT_PARSE if exc.parse_errors else EXIT_PRECONDITION
        return _fail("parse" if exc.parse_errors else "precondition", exc.messages, code)
    try:
        return args.func(cfg, args)
    except (PreconditionError, OrderCapError) as exc:
        return _fail("precondition", [str(exc)], EXIT_PRECONDITION)
    except (ConvergenceError, NoBracketError, OrbitEscapeError, DomainError) as exc:
        return _fail("numerical", [str(exc)], EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``branchwalk <command> ...``.

Exit codes:
  0  success
  2  unreadable or invalid input, bad arguments
  3  unknown node
  4  pattern mismatch in a rewrite
  5  equivalence or splitting condition violated
  6  cube-solve precondition violated
  7  verify found a deviation above the tolerance
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import tempfile

import numpy as np

from . import _jsonfmt
from .chains import ChainDecomposition, Chain, decomposition_to_json, full_decompose
from .cube import CUBE_NODES, AMPLITUDE_NAMES, CubeAmplitudes, _edge_ends, check_split_conditions, gate_check, solve_return_walk
from .errors import (
    BranchwalkError,
    ChoiceOutOfRange,
    ConditionViolated,
    DegenerateAmplitudes,
    DivisionByZeroOperand,
    GraphValidationError,
    InequalityViolated,
    MagnitudeConditionViolated,
    ParityMismatch,
    ParseError,
    PatternMismatch,
    StartNotInSpace,
    UnknownNode,
)
from .evolution import DYNAMICS_TOL, GATE_TOL, compare_walks, transfer_amplitude
from .graph import graph_to_json, json_to_graph
from .transforms import (
    branches_to_fourloop,
    check_condition,
    fourloop_to_branches,
    reduce_three_loop,
    rhomboid_expand,
    rhomboid_reduce,
    shift_one_segment_branch,
    sixloop_reduce,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNKNOWN_NODE = 3
EXIT_PATTERN = 4
EXIT_CONDITION = 5
EXIT_CUBE = 6
EXIT_DEVIATION = 7

TRANSFORM_KINDS = (
    "one-branch",
    "three-loop",
    "fourloop-forward",
    "fourloop-reverse",
    "rhomboid",
    "rhomboid-expand",
    "six-loop",
)
CHECK_KINDS = ("fourloop", "two-branch", "cube-split")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _fmt(x) -> str:
    return _jsonfmt.fmt_float(x)


def _fmt_complex(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return _fmt(z.real)
    return f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}j"


def _read_graph(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from exc
    try:
        return json_to_graph(text)
    except (ParseError, GraphValidationError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from exc


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".branchwalk-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text):
    """Write the main artifact to ``--out`` or standard output."""
    if args.out:
        try:
            _write_atomic(args.out, text)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror}", EXIT_INPUT) from exc
    else:
        sys.stdout.write(text)


def _info(args, line):
    # keep stdout clean for the artifact when it goes there
    print(line, file=sys.stdout if args.out else sys.stderr)


_REAL = re.compile(r"^\s*(?:sqrt\((?P<a>[^()]+)\)|√(?P<b>\S+)|(?P<c>[-+]?[^\s]+))\s*$")


def parse_real(text) -> float:
    """Real number, also accepting ``sqrt(x)`` and ``√x``."""
    m = _REAL.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    try:
        if m.group("a") is not None:
            return math.sqrt(float(m.group("a")))
        if m.group("b") is not None:
            return math.sqrt(float(m.group("b")))
        value = float(m.group("c"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def parse_complex(text) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive(text) -> float:
    v = parse_real(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _nonneg_int(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _pairs(items, what):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise CliError(f"{what} must look like key=value, got {item!r}", EXIT_INPUT)
        out[key.strip()] = value.strip()
    return out


def time_grid(tmax, steps):
    """``steps`` equal intervals on ``[0, tmax]``; ``steps = 0`` keeps only ``t = 0``."""
    if steps == 0:
        return [0.0]
    return [float(t) for t in np.linspace(0.0, tmax, steps + 1)]


# -- commands -----------------------------------------------------------------

def cmd_reduce(args) -> int:
    g = _read_graph(args.graph)
    if args.start not in g.index:
        raise CliError(f"unknown start node {args.start!r}", EXIT_UNKNOWN_NODE)
    d = full_decompose(g, args.start)
    _emit(args, decomposition_to_json(d))
    _info(args, f"chains: {len(d.chains)}")
    for k, c in enumerate(d.chains):
        hops = ", ".join(_fmt(abs(h)) for h in c.hoppings)
        _info(args, f"chain {k} from {c.start_label}: [{hops}]")
    return EXIT_OK


def _run_transform(kind, g, site, args):
    if kind == "one-branch":
        return shift_one_segment_branch(g, site)
    if kind == "three-loop":
        return reduce_three_loop(g, site, args.e1prime)
    if kind == "fourloop-forward":
        return branches_to_fourloop(g, site)
    if kind == "fourloop-reverse":
        return fourloop_to_branches(g, site, args.tol)
    if kind == "rhomboid":
        return rhomboid_reduce(g, site)
    if kind == "rhomboid-expand":
        if args.a_choice is None:
            raise CliError("rhomboid-expand needs --a-choice", EXIT_INPUT)
        return rhomboid_expand(g, site, args.a_choice, args.argd)
    return sixloop_reduce(g, site)


def cmd_transform(args) -> int:
    g = _read_graph(args.graph)
    site = _pairs(args.map, "--map")
    try:
        result = _run_transform(args.kind, g, site, args)
    except ConditionViolated as exc:
        print(f"condition violated: {exc}", file=sys.stderr)
        print(f"lhs = {_fmt_complex(exc.lhs)}", file=sys.stderr)
        print(f"rhs = {_fmt_complex(exc.rhs)}", file=sys.stderr)
        return EXIT_CONDITION
    except (PatternMismatch, DegenerateAmplitudes) as exc:
        raise CliError(f"pattern mismatch: {exc}", EXIT_PATTERN) from exc
    except ChoiceOutOfRange as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    _emit(args, graph_to_json(result.graph))
    for name, value in result.report:
        _info(args, f"{name} = {_fmt_complex(value)}")
    return EXIT_OK


def _cube_from_graph(g):
    if set(g.nodes) != set(CUBE_NODES) or g.has_diagonal:
        raise CliError("cube-split expects the 8 nodes 000..111 and no diagonal", EXIT_INPUT)
    values = {}
    for name in AMPLITUDE_NAMES:
        low, high = _edge_ends(name)
        values[name] = g.element(low, high)
    allowed = {frozenset(_edge_ends(n)) for n in AMPLITUDE_NAMES}
    for e in g.edges:
        if frozenset((e.source, e.target)) not in allowed and e.amp != 0:
            raise CliError(f"edge {e.source}-{e.target} is not a cube edge", EXIT_INPUT)
    return CubeAmplitudes.from_dict(values)


def cmd_check(args) -> int:
    if args.kind == "cube-split":
        if not args.graph:
            raise CliError("cube-split needs a graph file", EXIT_INPUT)
        amps = _cube_from_graph(_read_graph(args.graph))
        r1, r2, ok = check_split_conditions(amps, args.tol)
        doc = {"kind": "cube-split", "holds": ok, "residuals": [r1, r2], "tol": args.tol}
    else:
        raw = _pairs(args.amp, "--amp")
        try:
            amps = {k: parse_complex(v) for k, v in raw.items()}
        except argparse.ArgumentTypeError as exc:
            raise CliError(str(exc), EXIT_INPUT) from exc
        try:
            res = check_condition(args.kind, amps, args.tol)
        except KeyError as exc:
            raise CliError(f"{exc.args[0]}", EXIT_INPUT) from exc
        except DivisionByZeroOperand as exc:
            raise CliError(str(exc), EXIT_INPUT) from exc
        ok = res.holds
        doc = {
            "kind": args.kind,
            "holds": ok,
            "residual": res.residual,
            "scale": res.scale,
            "lhs": [res.lhs.real, res.lhs.imag],
            "rhs": [res.rhs.real, res.rhs.imag],
            "tol": args.tol,
        }
    _emit(args, _jsonfmt.dumps(doc))
    _info(args, "condition holds" if ok else "condition violated")
    return EXIT_OK if ok else EXIT_CONDITION


def cmd_cube_solve(args) -> int:
    try:
        sol = solve_return_walk(
            args.a, args.b, args.c, args.n, args.m, tuple(args.phases), mirror=not args.single_chain
        )
    except (MagnitudeConditionViolated, InequalityViolated, ParityMismatch) as exc:
        raise CliError(str(exc), EXIT_CUBE) from exc
    tol = args.tol if args.tol is not None else GATE_TOL
    ok, sign, deviation = gate_check(sol, tol)
    r1, r2, _ = check_split_conditions(sol.amplitudes)
    _emit(args, sol.to_json())
    _info(args, "omega: [" + ", ".join(_fmt(w) for w in sol.omega) + "]")
    _info(args, "omega_prime: [" + ", ".join(_fmt(w) for w in sol.omega_prime) + "]")
    _info(args, f"split residuals: {_fmt(r1)} {_fmt(r2)}")
    if ok:
        verdict = "+identity" if sign > 0 else "-identity"
    else:
        verdict = "not a return gate"
    _info(args, f"U(pi): {verdict} (max deviation {_fmt(deviation)})")
    return EXIT_OK


def _perturbed(d: ChainDecomposition, delta):
    # test hook: shift the first hopping of the first chain
    first = d.chains[0]
    if not first.hoppings:
        return d
    hops = (first.hoppings[0] + delta,) + tuple(first.hoppings[1:])
    chains = (Chain(hops, first.diagonals, first.start_label),) + tuple(d.chains[1:])
    return ChainDecomposition(chains, d.transform, d.residual_dim, d.basis)


def cmd_verify(args) -> int:
    g = _read_graph(args.graph)
    if args.start not in g.index:
        raise CliError(f"unknown start node {args.start!r}", EXIT_UNKNOWN_NODE)
    tol = args.tol if args.tol is not None else DYNAMICS_TOL
    d = full_decompose(g, args.start)
    if args.perturb:
        d = _perturbed(d, args.perturb)
    report = compare_walks(g, d, time_grid(args.tmax, args.steps), tol)
    doc = {
        "start": args.start,
        "chains": len(d.chains),
        "tracked": report["tracked"],
        "max_deviation": report["max_deviation"],
        "tol": tol,
        "ok": report["ok"],
    }
    _emit(args, _jsonfmt.dumps(doc))
    _info(args, f"max deviation: {_fmt(report['max_deviation'])}")
    return EXIT_OK if report["ok"] else EXIT_DEVIATION


def cmd_evolve(args) -> int:
    g = _read_graph(args.graph)
    for label in (args.source, args.target):
        if label not in g.index:
            raise CliError(f"unknown node {label!r}", EXIT_UNKNOWN_NODE)
    trace = transfer_amplitude(g, args.source, args.target, time_grid(args.tmax, args.steps))
    _emit(args, trace.to_csv())
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=argparse.SUPPRESS,
                        help="tolerance override")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="output file (default: standard output)")

    parser = argparse.ArgumentParser(
        prog="branchwalk",
        description="Reduce weighted graphs to chains and check quantum-walk equivalence.",
    )
    parser.add_argument("--tol", type=_positive, default=None, help="tolerance override")
    parser.add_argument("--out", default=None, help="output file (default: standard output)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", parents=[common], help="decompose a graph into chains")
    p.add_argument("graph")
    p.add_argument("--start", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("transform", parents=[common], help="apply one local rewrite")
    p.add_argument("kind", choices=TRANSFORM_KINDS)
    p.add_argument("graph")
    p.add_argument("--map", action="append", metavar="ROLE=LABEL",
                   help="assign a pattern role to a node (repeatable)")
    p.add_argument("--e1prime", type=parse_real, default=None,
                   help="expected self-loop on role 1' (three-loop)")
    p.add_argument("--a-choice", type=parse_complex, default=None,
                   help="new 0-1 amplitude (rhomboid-expand)")
    p.add_argument("--argd", type=parse_real, default=0.0,
                   help="phase of the new 0-3 amplitude (rhomboid-expand)")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("check", parents=[common], help="evaluate an equivalence condition")
    p.add_argument("kind", choices=CHECK_KINDS)
    p.add_argument("graph", nargs="?", help="cube graph file (cube-split)")
    p.add_argument("--amp", action="append", metavar="NAME=VALUE",
                   help="amplitude such as B=1 or A'=0.5+1j (repeatable)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cube-solve", parents=[common], help="solve for cube return-walk phases")
    for name in ("a", "b", "c"):
        p.add_argument(name, type=_positive)
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--phases", type=parse_real, nargs=6, default=[0.0] * 6,
                   metavar=("A11", "A00", "B11", "B00", "G11", "G00"),
                   help="free phases alpha11 alpha00 beta11 beta00 gamma11 gamma00")
    p.add_argument("--single-chain", action="store_true",
                   help="only make the chain from 111 return (second chain left generic)")
    p.set_defaults(func=cmd_cube_solve)

    p = sub.add_parser("verify", parents=[common], help="compare walks before and after reduction")
    p.add_argument("graph")
    p.add_argument("--start", required=True)
    p.add_argument("--tmax", type=parse_real, default=10.0)
    p.add_argument("--steps", type=_nonneg_int, default=64)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evolve", parents=[common], help="write a transfer amplitude trace as CSV")
    p.add_argument("graph")
    p.add_argument("--source", required=True)
    p.add_argument("--target", default=None, help="defaults to the source")
    p.add_argument("--tmax", type=parse_real, default=10.0)
    p.add_argument("--steps", type=_nonneg_int, default=64)
    p.set_defaults(func=cmd_evolve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if getattr(args, "target", "unset") is None:
        args.target = args.source
    if args.command in ("transform", "check") and args.tol is None:
        args.tol = 1e-9
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (UnknownNode, StartNotInSpace) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_NODE
    except BranchwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: ``rsm check | compose | simulate | graph``.

Exit codes: 0 ok, 1 validation error, 2 parse error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import modelfile, sim
from .automata import Automaton
from .modelfile import ModelError, Problem
from .ode import OdeSystem

OK, VALIDATION, PARSE, RUNTIME = 0, 1, 2, 3


def _color() -> bool:
    flag = os.environ.get("RSM_COLOR")
    if flag == "0":
        return False
    if flag == "1":
        return True
    return sys.stderr.isatty()


def report(problems: Sequence[Problem | str], label: str = "error") -> None:
    head = f"\033[31m{label}\033[0m" if _color() else label
    for p in problems:
        print(f"{head}: {p}", file=sys.stderr)


def _load(path: str):
    try:
        return modelfile.load(path), OK
    except ModelError as exc:
        report(exc.problems)
        return None, PARSE if exc.kind == "parse" else VALIDATION


def _evaluate(model):
    try:
        return model.evaluate(), OK
    except modelfile.RUNTIME_ERRORS as exc:
        report([Problem("/compose", str(exc))])
        return None, RUNTIME


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_check(args) -> int:
    return _load(args.path)[1]


def cmd_compose(args) -> int:
    model, code = _load(args.path)
    if model is None:
        return code
    box, code = _evaluate(model)
    if box is None:
        return code
    _write(modelfile.dumps(modelfile.composite_model(model, box)), args.out)
    return OK


def _assignments(text: str | None, flag: str) -> dict[str, float]:
    out: dict[str, float] = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"{flag}: expected name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ValueError(f"{flag}: {value!r} is not a number") from None
    return out


def cmd_simulate(args) -> int:
    model, code = _load(args.path)
    if model is None:
        return code
    if model.doctrine != "ode":
        report(["simulate needs an ODE model"])
        return VALIDATION
    try:
        x0 = _assignments(args.x0, "--x0")
        params = model.default_params()
        params.update(_assignments(args.params, "--params"))
    except ValueError as exc:
        report([str(exc)])
        return PARSE
    box, code = _evaluate(model)
    if box is None:
        return code
    assert isinstance(box, OdeSystem)
    try:
        traj = sim.integrate(box, x0, params, args.t, args.dt, args.method)
    except (sim.SimulationError, ValueError) as exc:
        report([str(exc)])
        return RUNTIME
    _write(traj.to_csv(), args.csv)
    return OK


def cmd_graph(args) -> int:
    model, code = _load(args.path)
    if model is None:
        return code
    if model.doctrine != "automata":
        report(["graph needs an automata model"])
        return VALIDATION
    box, code = _evaluate(model)
    if box is None:
        return code
    assert isinstance(box, Automaton)
    try:
        g = sim.graph(box)
    except sim.SimulationError as exc:
        report([str(exc)])
        return RUNTIME
    dot = g.to_dot()
    if args.dot:
        _write(dot, args.dot)
    else:
        sys.stdout.write(dot)
    print(sim.summary(box))
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsm", description="Compose and run resource sharing machines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a model file")
    p.add_argument("path")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compose", help="write the composite as a model file")
    p.add_argument("path")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("simulate", help="integrate an ODE composite and print CSV")
    p.add_argument("path")
    p.add_argument("--x0", required=True, help="initial values, e.g. R=1,F=1")
    p.add_argument("--params", help="parameter values, e.g. beta=1,gamma=0.5")
    p.add_argument("--t", type=float, default=1.0, help="end time (default 1)")
    p.add_argument("--dt", type=float, default=1e-2, help="step size (default 0.01)")
    p.add_argument("--method", choices=sim.METHODS, default="rk4")
    p.add_argument("--csv", help="output file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("graph", help="transition graph of an automata composite")
    p.add_argument("path")
    p.add_argument("--dot", help="write DOT here instead of stdout")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``run``, ``check`` and ``bench``."""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .complement import compile_program
from .program import ProgramError, is_hidden, parse_body, parse_program
from .solver import enumerate_models, model_key, solve
from .stream import DEFAULT_BUDGET, Budget, BudgetExceeded
from .terms import render
from .verifier import ORACLE_ATOM_LIMIT, GroundingError, brute_force_models

EXIT_OK = 0
EXIT_PROGRAM = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64

BUDGET_ENV = "STABLEREL_BUDGET"


@dataclass
class RunConfig:
    mode: str
    file: Optional[str] = None
    query: Optional[str] = None
    n_answers: Optional[int] = None  # None: all
    show_models: bool = False
    sorted: bool = False
    show_aux: bool = False
    budget: int = DEFAULT_BUDGET
    json: bool = False
    queens_n: int = 0
    all_solutions: bool = False

    def __post_init__(self):
        if self.mode == "bench" and self.queens_n < 1:
            raise ValueError("queens_n must be at least 1")


class _UsageError(Exception):
    pass


class _Exit(Exception):
    def __init__(self, status, text=""):
        self.status = status
        self.text = text


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports instead of exiting the process."""

    sink: io.StringIO

    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")

    def exit(self, status=0, message=None):
        if message:
            self.sink.write(message)
        raise _Exit(status)

    def _print_message(self, message, file=None):
        if message:
            self.sink.write(message)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def build_parser(sink: io.StringIO) -> argparse.ArgumentParser:
    def make(*args, **kwargs):
        p = _Parser(*args, **kwargs)
        p.sink = sink
        return p

    parser = make(prog="stablerel", description="Stable models of normal logic programs.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="answer a query or list stable models")
    run.sink = sink
    run.add_argument("file")
    run.add_argument("--query", help='query body, e.g. "path(a,X), not q(X)"')
    count = run.add_mutually_exclusive_group()
    count.add_argument("-n", type=_positive_int, metavar="K", help="stop after K answers")
    count.add_argument("--all", action="store_true", help="all answers (default)")
    run.add_argument("--models", action="store_true", help="print the model behind each answer")
    run.add_argument("--sorted", action="store_true", help="sort atoms and answers")
    run.add_argument("--show-aux", action="store_true", help="also print hidden constraint atoms")
    run.add_argument("--budget", type=_positive_int, metavar="STEPS")
    run.add_argument("--json", action="store_true")

    check = sub.add_parser("check", help="compare the solver against brute force")
    check.sink = sink
    check.add_argument("file")
    check.add_argument("--budget", type=_positive_int, metavar="STEPS")

    bench = sub.add_parser("bench", help="time a benchmark family")
    bench.sink = sink
    bench.add_argument("family", choices=["nqueens"])
    bench.add_argument("n", type=_positive_int, metavar="N")
    bench.add_argument("--all", action="store_true", help="find all solutions")
    bench.add_argument("--json", action="store_true")
    return parser


def parse_args(argv, environ=None) -> RunConfig:
    """Turn ``argv`` into a ``RunConfig``; raises ``_UsageError``."""
    environ = os.environ if environ is None else environ
    sink = io.StringIO()
    try:
        args = build_parser(sink).parse_args(argv)
    except _Exit as exc:
        raise _Exit(exc.status, sink.getvalue()) from None
    budget = DEFAULT_BUDGET
    if environ.get(BUDGET_ENV):
        try:
            budget = _positive_int(environ[BUDGET_ENV])
        except argparse.ArgumentTypeError as exc:
            raise _UsageError(f"stablerel: error: {BUDGET_ENV}: {exc}\n")
    if getattr(args, "budget", None):
        budget = args.budget
    if args.mode == "bench":
        return RunConfig("bench", budget=budget, json=args.json, queens_n=args.n, all_solutions=args.all)
    if args.mode == "check":
        return RunConfig("check", file=args.file, budget=budget)
    return RunConfig(
        "run",
        file=args.file,
        query=args.query,
        n_answers=args.n,
        show_models=args.models,
        sorted=args.sorted,
        show_aux=args.show_aux,
        budget=budget,
        json=args.json,
    )


# -- formatting ------------------------------------------------------------------


def visible_atoms(model, sorted_: bool = True, show_aux: bool = False) -> list:
    atoms = [a for a in model if show_aux or not is_hidden(a.functor)]
    texts = [render(a) for a in atoms]
    return sorted(texts) if sorted_ else texts


def format_model(model, sorted_: bool = True, show_aux: bool = False) -> str:
    return "{" + ", ".join(visible_atoms(model, sorted_, show_aux)) + "}"


def format_bindings(bindings: dict) -> str:
    if not bindings:
        return "yes"
    return ", ".join(f"{k} = {render(v)}" for k, v in bindings.items())


def nqueens_program(n: int):
    """The n-queens choice encoding: every cell is guessed queen or not."""
    if n < 1:
        raise ValueError("n must be at least 1")
    lines = [" ".join(f"num({i})." for i in range(1, n + 1))]
    lines += [
        "q(R,C) :- num(R), num(C), not negq(R,C).",
        "negq(R,C) :- num(R), num(C), not q(R,C).",
        "hasq(R) :- num(R), q(R,C).",
        ":- num(R), not hasq(R).",
        ":- q(R,C1), q(R,C2), neq(C1,C2).",
        ":- q(R1,C), q(R2,C), neq(R1,R2).",
        ":- q(R1,C1), q(R2,C2), neq(R1,R2), absdiff(R1,R2,D), absdiff(C1,C2,D).",
    ]
    return parse_program("\n".join(lines) + "\n")


# -- commands ----------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise ProgramError(f"cannot read {path}: {exc.strerror}") from None


def _in_ground_order(model, order: dict) -> list:
    return sorted(model, key=lambda a: order.get(a, len(order)))


def _cmd_run(cfg: RunConfig, out: io.StringIO):
    prog = parse_program(_read(cfg.file))
    query = parse_body(cfg.query) if cfg.query else (prog.queries[0] if prog.queries else None)
    if query is not None:
        prog = prog.__class__.from_rules(prog.rules, (query,), prog.constraints)
    cp = compile_program(prog)
    order = cp.ground.index
    budget = Budget(cfg.budget)

    def show(m):
        return format_model(m if cfg.sorted else _in_ground_order(m, order), cfg.sorted, cfg.show_aux)

    def atoms(m):
        return visible_atoms(m if cfg.sorted else _in_ground_order(m, order), cfg.sorted, cfg.show_aux)

    start = time.perf_counter()
    if query is None:
        try:
            models = enumerate_models(cp, budget, limit=cfg.n_answers)
        except BudgetExceeded as exc:
            _print_models(exc.partial, show, out, cfg, start, atoms)
            raise
        _print_models(models, show, out, cfg, start, atoms)
        return
    try:
        answers = solve(query, cp, cfg.n_answers, budget, models=cfg.show_models)
    except BudgetExceeded as exc:
        _print_answers(exc.partial, show, out, cfg, start, atoms)
        raise
    _print_answers(answers, show, out, cfg, start, atoms)


def _print_models(models, show, out, cfg, start, atoms):
    seconds = time.perf_counter() - start
    if cfg.json:
        payload = {"models": [atoms(m) for m in models], "count": len(models), "seconds": round(seconds, 6)}
        out.write(json.dumps(payload) + "\n")
        return
    for m in models:
        out.write(f"Model: {show(m)}\n")
    out.write(f"Models: {len(models)}\n")


def _print_answers(answers, show, out, cfg, start, atoms):
    seconds = time.perf_counter() - start
    if cfg.sorted:
        answers = sorted(answers, key=lambda a: (format_bindings(a.bindings), model_key(a.model)))
    if cfg.json:
        payload = {
            "answers": [{k: render(v) for k, v in a.bindings.items()} for a in answers],
            "models": [atoms(a.model) for a in answers],
            "count": len(answers),
            "seconds": round(seconds, 6),
        }
        out.write(json.dumps(payload) + "\n")
        return
    for a in answers:
        out.write(f"Answer: {format_bindings(a.bindings)}\n")
        if cfg.show_models:
            out.write(f"Model: {show(a.model)}\n")
    out.write(f"Answers: {len(answers)}\n")


def _cmd_check(cfg: RunConfig, out: io.StringIO) -> int:
    cp = compile_program(parse_program(_read(cfg.file)))
    n = len(cp.ground.atoms)
    if n > ORACLE_ATOM_LIMIT:
        raise GroundingError(
            f"check needs at most {ORACLE_ATOM_LIMIT} ground atoms, program has {n}"
        )
    solver = set(enumerate_models(cp, Budget(cfg.budget)))
    oracle = {frozenset(a for a in m if not is_hidden(a.functor)) for m in brute_force_models(cp.ground)}
    if solver == oracle:
        noun = "model" if len(oracle) == 1 else "models"
        out.write(f"OK: solver and oracle agree ({len(oracle)} {noun})\n")
        return EXIT_OK
    out.write("MISMATCH: solver and oracle disagree\n")
    for m in sorted(oracle - solver, key=model_key):
        out.write(f"  missing: {format_model(m)}\n")
    for m in sorted(solver - oracle, key=model_key):
        out.write(f"  extra:   {format_model(m)}\n")
    return EXIT_PROGRAM


def _cmd_bench(cfg: RunConfig, out: io.StringIO):
    cp = compile_program(nqueens_program(cfg.queens_n))
    start = time.perf_counter()
    models = enumerate_models(cp, Budget(cfg.budget), limit=None if cfg.all_solutions else 1)
    seconds = time.perf_counter() - start
    if cfg.json:
        payload = {"models": [visible_atoms(m) for m in models], "count": len(models), "seconds": round(seconds, 6)}
        out.write(json.dumps(payload) + "\n")
        return
    out.write(f"Models: {len(models)}\n")
    out.write(f"Time: {seconds:.3f}s\n")


def cli_run(argv, environ=None) -> tuple:
    """Run one command; returns ``(exit_code, stdout, stderr)``."""
    out, err = io.StringIO(), io.StringIO()
    try:
        cfg = parse_args(list(argv), environ)
    except _UsageError as exc:
        return EXIT_USAGE, "", str(exc)
    except _Exit as exc:
        # --help: argparse stops after printing
        return exc.status, exc.text, ""
    try:
        if cfg.mode == "run":
            _cmd_run(cfg, out)
            code = EXIT_OK
        elif cfg.mode == "check":
            code = _cmd_check(cfg, out)
        else:
            _cmd_bench(cfg, out)
            code = EXIT_OK
    except BudgetExceeded as exc:
        err.write(f"error: {exc}\n")
        code = EXIT_BUDGET
    except ProgramError as exc:
        err.write(f"error: {exc}\n")
        code = EXIT_PROGRAM
    return code, out.getvalue(), err.getvalue()


def main(argv=None) -> int:
    code, out, err = cli_run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code

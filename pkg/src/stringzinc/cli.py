"""Command-line driver: parse, flatten, optionally solve, print results."""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

from .flat import FlatError
from .flatten_base import FlattenError
from .flatten_int import ENV_MAX_LEN, default_max_len, flatten_int
from .flatten_str import flatten_str
from .model import IntVarDecl, StringVarDecl
from .parser import ParseError, load_model
from .solver import ALL, OPTIMAL, UNKNOWN, UNSAT, Solver

SEPARATOR = "----------"
COMPLETE = "=========="
UNSAT_LINE = "=====UNSATISFIABLE====="
UNKNOWN_LINE = "=====UNKNOWN====="
DEFAULT_TIME_LIMIT = 600.0


@dataclass
class RunConfig:
    model: str
    data: Optional[str] = None
    max_len: Optional[int] = None  # None: environment, then the default
    target: str = "int"
    flatten_only: bool = False
    all_solutions: bool = False
    time_limit: float = DEFAULT_TIME_LIMIT  # 0 means no limit
    stats: bool = False
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.max_len is not None and self.max_len < 1:
            raise ValueError("the maximum length must be at least 1")
        if self.time_limit < 0:
            raise ValueError("the time limit must not be negative")
        if self.target not in ("str", "int"):
            raise ValueError(f"unknown target {self.target!r}")
        if self.target == "str" and not self.flatten_only:
            raise ValueError("--target str only produces a flat instance; add --flatten-only")


class UsageError(Exception):
    pass


def quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def format_solution(values: dict, order: Sequence[str]) -> str:
    lines = []
    for name in order:
        v = values[name]
        lines.append(f"{name} = {quote(v) if isinstance(v, str) else v};")
    return "\n".join(lines + [SEPARATOR]) + "\n"


def stat_lines(stats: dict) -> str:
    body = "".join(f"%%%mzn-stat: {k}={v}\n" for k, v in stats.items())
    return body + "%%%mzn-stat-end\n"


def execute(cfg: RunConfig, out: TextIO) -> None:
    """Run one configuration, writing the textual result to ``out``."""
    t0 = time.perf_counter()
    m = load_model(cfg.model, cfg.data)
    kind = m.solve_item.kind
    if cfg.all_solutions and kind != "satisfy":
        raise UsageError(f"--all-solutions needs a satisfaction problem, the model has {kind}")
    if cfg.target == "str":
        inst = flatten_str(m)
        out.write(inst.emit())
        if cfg.stats:
            out.write(stat_lines({"flatTime": round(time.perf_counter() - t0, 6),
                                  "flatConstraints": len(inst.constraints)}))
        return
    ell = cfg.max_len if cfg.max_len is not None else default_max_len()
    inst = flatten_int(m, ell)
    text = inst.emit()
    flat_time = time.perf_counter() - t0
    for w in inst.warnings:
        out.write(f"% WARNING: {w}\n")
    if cfg.flatten_only:
        out.write(text)
        if cfg.stats:
            out.write(stat_lines({"flatTime": round(flat_time, 6), "maxLength": ell,
                                  "flatVars": len(inst.vars),
                                  "flatConstraints": len(inst.constraints)}))
        return
    order = [d.name for d in m.decls if isinstance(d, (StringVarDecl, IntVarDecl))]
    solver = Solver(text)

    def show(sol) -> None:
        out.write(format_solution(sol.decoded(), order))
        out.flush()

    res = solver.solve(all_solutions=cfg.all_solutions, time_limit=cfg.time_limit or None,
                       on_solution=show)
    if res.status == UNSAT:
        out.write(UNSAT_LINE + "\n")
    elif res.status in (OPTIMAL, ALL):
        out.write(COMPLETE + "\n")
    elif res.status == UNKNOWN and not res.solutions:
        out.write(UNKNOWN_LINE + "\n")
    if cfg.stats:
        stats = {"flatTime": round(flat_time, 6), "maxLength": ell}
        stats.update(res.stats.as_dict())
        stats["status"] = res.status
        if res.best is not None and res.best.objective is not None:
            stats["objective"] = res.best.objective
        out.write(stat_lines(stats))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stringzinc",
        description="Flatten and solve a constraint model over bounded-length strings.",
    )
    ap.add_argument("model", help="model file (.szn)")
    ap.add_argument("-d", "--data", help="data file (.dzn) binding parameters")
    ap.add_argument("-l", "--max-length", type=int,
                    help=f"maximum string length (default {ENV_MAX_LEN} or 1000)")
    ap.add_argument("--target", choices=("str", "int"), default="int",
                    help="keep string predicates (str) or lower to integers (int)")
    ap.add_argument("--flatten-only", action="store_true",
                    help="print the flat instance instead of solving")
    ap.add_argument("-a", "--all-solutions", action="store_true", help="print every solution")
    ap.add_argument("-t", "--time-limit", type=float, default=DEFAULT_TIME_LIMIT,
                    help="seconds, 0 for no limit (default 600)")
    ap.add_argument("--stats", action="store_true", help="append search statistics")
    ap.add_argument("-o", "--output", help="write results to this file")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig(args.model, args.data, args.max_length, args.target, args.flatten_only,
                        args.all_solutions, args.time_limit, args.stats, args.output)
    except ValueError as exc:
        ap.error(str(exc))
    if not os.path.isfile(cfg.model):
        print(f"stringzinc: error: cannot read model file {cfg.model}", file=sys.stderr)
        return 1
    try:
        if cfg.output is None:
            execute(cfg, sys.stdout)
        else:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                execute(cfg, fh)
    except UsageError as exc:
        ap.error(str(exc))
    except (OSError, ParseError, FlattenError, FlatError) as exc:
        print(f"stringzinc: error: {exc}", file=sys.stderr)
        return 1
    return 0


# -- reading results back -------------------------------------------------------

_ASSIGN = re.compile(r'^([A-Za-z][A-Za-z0-9_]*) = ("(?:[^"\\]|\\.)*"|-?[0-9]+);$')
_UNESCAPE = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def _unquote(tok: str) -> str:
    return re.sub(r"\\(.)", lambda m: _UNESCAPE[m.group(1)], tok[1:-1])


def read_solutions(text: str) -> tuple:
    """Parse printed output into (list of assignments, final marker or None)."""
    sols: list = []
    cur: dict = {}
    final = None
    for line in text.splitlines():
        if not line or line.startswith("%"):
            continue
        if line == SEPARATOR:
            sols.append(cur)
            cur = {}
        elif line in (COMPLETE, UNSAT_LINE, UNKNOWN_LINE):
            final = line
        else:
            m = _ASSIGN.match(line)
            if m is None:
                raise ValueError(f"unexpected output line: {line!r}")
            v = m.group(2)
            cur[m.group(1)] = _unquote(v) if v.startswith('"') else int(v)
    if cur:
        raise ValueError("output ends inside a solution block")
    return sols, final


if __name__ == "__main__":
    sys.exit(main())

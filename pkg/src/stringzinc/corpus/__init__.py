"""Benchmark models and a runner that tabulates runtimes per case and length bound.

Six models ship in ``models/``.  Every one except the palindrome declares an
integer parameter ``L`` that the runner binds to the length bound of the run.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..flatten_int import flatten_int
from ..model import ParDecl
from ..parser import load_model
from ..solver import Solver
from .oracle import generate_oracle_suite

MODELS = Path(__file__).resolve().parent / "models"
DEFAULT_GRID = (10, 25, 50)
FULL_GRID = (250, 500, 1000)
TIMEOUT = "TIMEOUT"
ERROR = "ERROR"


@dataclass(frozen=True)
class BenchCase:
    name: str
    path: Path
    ells: tuple = FULL_GRID
    # expected status at small bounds, and the optimum when there is one
    expected: Optional[str] = None
    objective: Optional[int] = None

    def model(self, ell: int):
        m = load_model(str(self.path))
        d = m.decl("L")
        if isinstance(d, ParDecl) and d.value is None:
            m = m.with_data({"L": ell})
        return m


CASES = (
    BenchCase("anbn", MODELS / "anbn.szn", expected="UNSATISFIABLE"),
    BenchCase("chunksplit", MODELS / "chunksplit.szn", expected="SATISFIED"),
    BenchCase("hamming", MODELS / "hamming.szn", expected="SATISFIED"),
    BenchCase("levenshtein", MODELS / "levenshtein.szn", expected="SATISFIED"),
    BenchCase("palindrome", MODELS / "palindrome.szn", expected="OPTIMAL", objective=7),
    BenchCase("stringreplace", MODELS / "stringreplace.szn", expected="SATISFIED"),
)


@dataclass(frozen=True)
class Cell:
    case: str
    ell: int
    status: str
    total_s: float
    flatten_s: float
    objective: Optional[int] = None
    warnings: int = 0
    error: Optional[str] = None

    @property
    def solve_s(self) -> float:
        return self.total_s - self.flatten_s

    @property
    def flatten_share(self) -> float:
        return self.flatten_s / self.total_s if self.total_s > 0 else 0.0


def run_case(case: BenchCase, ell: int, time_limit: Optional[float] = 120.0) -> Cell:
    """One cell of the table.  Failures are recorded, never raised."""
    t0 = time.perf_counter()
    t1 = None
    warnings = 0
    try:
        inst = flatten_int(case.model(ell), ell)
        text = inst.emit()
        warnings = len(inst.warnings)
        t1 = time.perf_counter()
        res = Solver(text).solve(time_limit=time_limit)
        t2 = time.perf_counter()
    except Exception as exc:  # a broken case must not stop the suite
        t2 = time.perf_counter()
        return Cell(case.name, ell, ERROR, t2 - t0, (t1 or t2) - t0, None, warnings,
                    f"{type(exc).__name__}: {exc}")
    status = TIMEOUT if res.status == "UNKNOWN" else res.status
    obj = res.best.objective if res.best is not None else None
    return Cell(case.name, ell, status, t2 - t0, t1 - t0, obj, warnings)


def _run_job(job: tuple) -> Cell:
    return run_case(*job)


def run_suite(cases: Iterable[BenchCase], ells: Optional[Sequence[int]] = None,
              time_limit: Optional[float] = 120.0, jobs: int = 1) -> list:
    """Run every case at every bound; the result is sorted by case name then bound."""
    work = [(c, ell, time_limit) for c in cases for ell in (ells or c.ells)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            cells = list(pool.map(_run_job, work))
    else:
        cells = [_run_job(w) for w in work]
    return sorted(cells, key=lambda c: (c.case, c.ell))


def _cell_text(c: Cell) -> str:
    if c.status == TIMEOUT:
        return "t/o"
    if c.status == ERROR:
        return "error"
    return f"{c.total_s:.2f}s"


def format_table(cells: Sequence[Cell]) -> str:
    """Aligned table: one row per case, one column per bound, plus a flattening-share row."""
    if not cells:
        return ""
    ells = sorted({c.ell for c in cells})
    names = sorted({c.case for c in cells})
    by = {(c.case, c.ell): c for c in cells}
    rows = [["case"] + [f"l={e}" for e in ells]]
    for n in names:
        rows.append([n] + [_cell_text(by[n, e]) if (n, e) in by else "-" for e in ells])
    share = []
    for e in ells:
        col = [c for c in cells if c.ell == e]
        total = sum(c.total_s for c in col)
        share.append(f"{100 * sum(c.flatten_s for c in col) / total:.1f}%" if total else "-")
    rows.append(["flatten share"] + share)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(r[0].ljust(widths[0]) if i == 0 else r[i].rjust(widths[i])
                       for i in range(len(r))) for r in rows]
    detail = [f"{c.case} l={c.ell}: {c.status}" + (f" ({c.error})" if c.error else "")
              for c in cells if c.status in (ERROR, TIMEOUT)]
    return "\n".join(lines + detail) + "\n"


def format_csv(cells: Sequence[Cell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "ell", "status", "total_s", "flatten_s"])
    for c in cells:
        w.writerow([c.case, c.ell, c.status, f"{c.total_s:.6f}", f"{c.flatten_s:.6f}"])
    return buf.getvalue()


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="stringzinc-suite",
                                 description="Run the benchmark corpus and print a runtime table.")
    ap.add_argument("--full-grid", action="store_true",
                    help=f"use the bounds {', '.join(map(str, FULL_GRID))}")
    ap.add_argument("-l", "--ell", type=int, action="append",
                    help="length bound to run (repeatable)")
    ap.add_argument("-t", "--time-limit", type=float, default=120.0,
                    help="seconds per cell, 0 for none (default 120)")
    ap.add_argument("-j", "--jobs", type=int, default=1, help="parallel worker processes")
    ap.add_argument("--case", action="append", help="run only this case (repeatable)")
    ap.add_argument("--csv", metavar="FILE", help="also write the table as CSV")
    args = ap.parse_args(argv)
    if args.ell and args.full_grid:
        ap.error("--ell and --full-grid are exclusive")
    if args.ell and any(e < 1 for e in args.ell):
        ap.error("length bounds must be positive")
    ells = args.ell or (FULL_GRID if args.full_grid else DEFAULT_GRID)
    cases = [c for c in CASES if not args.case or c.name in args.case]
    unknown = set(args.case or ()) - {c.name for c in CASES}
    if unknown:
        ap.error(f"unknown case(s): {', '.join(sorted(unknown))}")
    cells = run_suite(cases, ells, args.time_limit or None, args.jobs)
    sys.stdout.write(format_table(cells))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(format_csv(cells))
    return 0


__all__ = [
    "BenchCase", "CASES", "Cell", "DEFAULT_GRID", "FULL_GRID", "format_csv", "format_table",
    "generate_oracle_suite", "main", "run_case", "run_suite",
]

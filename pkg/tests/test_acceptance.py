"""The seven acceptance criteria, each at its stated tolerance.

Every test prints a one-line verdict, and the terminal summary lists one
PASS/FAIL line per criterion.
"""

import io
import itertools
import random
import time

import pytest

from stringzinc import flatten_int, flatten_str, parse_model
from stringzinc.cli import RunConfig, execute
from stringzinc.corpus import CASES, ERROR, TIMEOUT, run_suite
from stringzinc.corpus.oracle import automaton_source, generate_oracle_suite
from stringzinc.model import Automaton
from stringzinc.solver import ALL, OPTIMAL, UNSAT, Solver

from conftest import PALINDROME

acceptance = pytest.mark.acceptance


def verdict(number: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


# -- 1 ---------------------------------------------------------------------------------

@acceptance(1, "palindrome optimum |x| = 7, n = 2 at l = 15 within 60 s")
def test_palindrome_optimum():
    t0 = time.perf_counter()
    m = parse_model(PALINDROME.read_text())
    res = Solver(flatten_int(m, 15).emit()).solve(time_limit=60)
    elapsed = time.perf_counter() - t0
    best = res.best.decoded() if res.best else {}
    ok = res.status == OPTIMAL and len(best.get("x", "")) == 7 and best.get("n") == 2 \
        and elapsed <= 60
    verdict(1, ok, f"status {res.status}, x={best.get('x')!r}, n={best.get('n')}, "
                   f"{elapsed:.2f}s")
    assert res.status == OPTIMAL
    assert len(best["x"]) == 7 and best["n"] == 2
    assert elapsed <= 60


# -- 2 and 3 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def oracle_runs():
    """Every oracle case solved in all-solutions mode, with wall time."""
    t0 = time.perf_counter()
    runs = []
    for case in generate_oracle_suite():
        inst = flatten_int(case.model(), case.max_len)
        res = Solver(inst.emit()).solve(all_solutions=True)
        runs.append((case, inst, res))
    return runs, time.perf_counter() - t0


@acceptance(2, "oracle equivalence over every constraint form, |S| <= 3, l <= 3")
def test_oracle_equivalence(oracle_runs):
    runs, elapsed = oracle_runs
    bad = []
    for case, _, res in runs:
        got = {frozenset(s.decoded().items()) for s in res.solutions}
        if res.status not in (ALL, UNSAT) or got != case.solutions:
            bad.append(case.name)
    forms = {case.form for case, _, _ in runs}
    verdict(2, not bad and elapsed <= 600,
            f"{len(runs)} models, {len(forms)} forms, {len(bad)} mismatches, {elapsed:.1f}s")
    assert bad == []
    assert elapsed <= 600


@acceptance(3, "padding law holds in every decoded oracle solution")
def test_padding_invariant(oracle_runs):
    runs, _ = oracle_runs
    checked = violations = 0
    for _, inst, res in runs:
        for sol in res.solutions:
            a = sol.assignment
            for s in inst.strings:
                n = a[s.length] if isinstance(s.length, str) else s.length
                for i, c in enumerate(s.chars, start=1):
                    code = a[c] if isinstance(c, str) else c
                    checked += 1
                    if (i > n) != (code == 0):
                        violations += 1
    verdict(3, violations == 0 and checked > 0,
            f"{checked} positions checked, {violations} violations")
    assert checked > 0
    assert violations == 0


# -- 4 -----------------------------------------------------------------------------------

@acceptance(4, "lowered size ratio at l = 1000 / 100 in [8, 12]; string output independent of l")
def test_flattening_proportionality():
    m = parse_model(PALINDROME.read_text())
    small = len(flatten_int(m, 100).constraints)
    large = len(flatten_int(m, 1000).constraints)
    ratio = large / small
    # the string-preserving form is produced through the driver at several bounds
    texts = set()
    for ell in (1, 15, 100, 1000):
        out = io.StringIO()
        execute(RunConfig(str(PALINDROME), max_len=ell, target="str", flatten_only=True), out)
        texts.add(out.getvalue())
    texts.add(flatten_str(m).emit())
    ok = 8 <= ratio <= 12 and len(texts) == 1
    verdict(4, ok, f"{large}/{small} = {ratio:.2f}, {len(texts)} distinct string outputs")
    assert 8 <= ratio <= 12
    assert len(texts) == 1


# -- 5 -----------------------------------------------------------------------------------

def _random_automaton(rng: random.Random, deterministic: bool) -> Automaton:
    q = rng.randint(1, 4 if deterministic else 3)
    symbols = tuple(rng.sample("abc", rng.randint(1, 3)))
    if deterministic:
        table = tuple(tuple(rng.randint(0, q) for _ in symbols) for _ in range(q))
    else:
        table = tuple(tuple(frozenset(t for t in range(1, q + 1) if rng.random() < 0.4)
                            for _ in symbols) for _ in range(q))
    finals = frozenset(t for t in range(1, q + 1) if rng.random() < 0.5)
    return Automaton(q, symbols, table, rng.randint(1, q), finals, deterministic)


@acceptance(5, "50 random DFAs and 20 random NFAs match direct simulation at l = 4")
def test_regular_encoding():
    rng = random.Random(20240917)
    auts = [_random_automaton(rng, True) for _ in range(50)]
    auts += [_random_automaton(rng, False) for _ in range(20)]
    bad = []
    for k, aut in enumerate(auts):
        want = {w for n in range(5) for w in map("".join, itertools.product(aut.symbols, repeat=n))
                if aut.accepts(w)}
        res = Solver(flatten_int(parse_model(automaton_source(aut, 4)), 4).emit()).solve(
            all_solutions=True)
        got = {s.decoded()["x"] for s in res.solutions}
        if got != want or res.status not in (ALL, UNSAT):
            bad.append(k)
    verdict(5, not bad, f"{len(auts)} automata, {len(bad)} mismatches")
    assert bad == []


# -- 6 -----------------------------------------------------------------------------------

@acceptance(6, "an unbounded string variable yields exactly one warning naming it and l")
def test_truncation_warning():
    inst = flatten_int(parse_model("var string: x;\nsolve satisfy;\n"), 37)
    ws = inst.warnings
    ok = len(ws) == 1 and "x" in ws[0] and "37" in ws[0]
    verdict(6, ok, repr(ws))
    assert len(ws) == 1
    assert "'x'" in ws[0] and "37" in ws[0]


# -- 7 -----------------------------------------------------------------------------------

@acceptance(7, "every corpus case at l = 50 is conclusive or a clean timeout within 120 s")
def test_benchmark_health():
    cells = run_suite(CASES, (50,), time_limit=120)
    conclusive = {"SATISFIED", OPTIMAL, UNSAT, ALL}
    bad = [c for c in cells if c.status == ERROR or
           (c.status not in conclusive and c.status != TIMEOUT)]
    shares = ", ".join(f"{c.case} {c.status} {c.total_s:.2f}s flat {100 * c.flatten_share:.0f}%"
                       for c in cells)
    ok = not bad and len(cells) == len(CASES) and all(0 <= c.flatten_share <= 1 for c in cells)
    verdict(7, ok, shares)
    assert len(cells) == len(CASES)
    assert bad == []
    for c in cells:
        assert 0 < c.flatten_s <= c.total_s
        assert c.total_s <= 120 + 30  # the limit applies to search; flattening is extra

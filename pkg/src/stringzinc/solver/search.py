"""Posting flat instances, depth-first search and branch-and-bound."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

from ..flat import FlatError, ParsedFlat, check_constraint, decode_string, parse_flat
from .propagators import (
    Clause, Element, Eq, EqReif, Function, GlobalCardinality, Le, LeReif, LexLessEq, Linear,
    Ne, Regular,
)
from .store import IntDomain, Store, bits

BISECT_ABOVE = 32


class UnsupportedConstraint(FlatError):
    pass


class VerificationError(RuntimeError):
    """A solution found by search violates the instance; always a solver bug."""


AT_FIXPOINT = "AtFixpoint"
FAILED = "Failed"

SATISFIED = "SATISFIED"
OPTIMAL = "OPTIMAL"
ALL = "ALL_SOLUTIONS"
UNSAT = "UNSATISFIABLE"
UNKNOWN = "UNKNOWN"


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    propagations: int = 0
    peak_depth: int = 0
    solutions: int = 0
    time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "nodes": self.nodes, "failures": self.failures, "propagations": self.propagations,
            "peakDepth": self.peak_depth, "solutions": self.solutions,
            "solveTime": round(self.time, 6),
        }


@dataclass
class Solution:
    assignment: dict
    objective: Optional[int] = None
    strings: dict = field(default_factory=dict)
    ints: dict = field(default_factory=dict)

    def decoded(self) -> dict:
        """User-visible values: strings and integer variables."""
        out = dict(self.strings)
        out.update(self.ints)
        return out


@dataclass
class Result:
    """Outcome of a search.

    ``status`` is SATISFIED (first solution), OPTIMAL, ALL_SOLUTIONS (space
    exhausted in all-solutions mode), UNSATISFIABLE, or UNKNOWN (a limit hit;
    ``solutions`` then holds whatever was found, best last).
    """

    status: str
    solutions: list
    stats: SearchStats

    @property
    def best(self) -> Optional[Solution]:
        return self.solutions[-1] if self.solutions else None

    @property
    def complete(self) -> bool:
        return self.status != UNKNOWN


class Solver:
    def __init__(self, flat: Union[str, ParsedFlat]):
        if isinstance(flat, str):
            self.text: Optional[str] = flat
            flat = parse_flat(flat)
        else:
            self.text = None
        self.p = flat
        self.store = Store()
        self.index: dict = {}
        self.names: list = []
        self.consts: dict = {}
        self.root_failed = False
        self.registry: Counter = Counter()
        for name, dom in flat.vars.items():
            if dom is None:
                raise UnsupportedConstraint(f"variable {name} has no finite domain")
        # variables joined by int_eq share one store variable
        rep = _eq_classes(flat)
        merged: dict = {}
        for name, dom in flat.vars.items():
            r = rep.get(name, name)
            merged[r] = merged[r] & dom if r in merged else dom
        for name in flat.vars:
            r = rep.get(name, name)
            if r not in self.index:
                dom = merged[r]
                if not dom:
                    self.root_failed = True
                    dom = flat.vars[r]
                lo, hi = min(dom), max(dom)
                contiguous = len(dom) == hi - lo + 1
                self.index[r] = self.store.new_var(lo, hi, None if contiguous else dom)
            self.index[name] = self.index[r]
            self.names.append(name)
        for c in flat.constraints:
            if c.name == "int_eq" and all(isinstance(a, str) and a in flat.vars for a in c.args) \
                    and rep.get(c.args[0], c.args[0]) == rep.get(c.args[1], c.args[1]):
                continue
            self.post(c.name, c.args)
        self.order = self.branch_order()
        kind, obj = flat.solve
        self.kind = kind
        self.obj = None if obj is None else self.atom(obj)

    # -- posting ------------------------------------------------------------------

    def atom(self, a: Any) -> int:
        if isinstance(a, bool):
            a = int(a)
        if isinstance(a, int):
            if a not in self.consts:
                self.consts[a] = self.store.new_var(a, a)
            return self.consts[a]
        if isinstance(a, str):
            if a in self.index:
                return self.index[a]
            raise FlatError(f"unknown variable {a}")
        raise FlatError(f"expected a variable or integer, found {a!r}")

    def array(self, a: Any) -> list:
        if isinstance(a, str) and a in self.p.arrays:
            a = self.p.arrays[a]
        if not isinstance(a, tuple):
            raise FlatError(f"expected an array, found {a!r}")
        return [self.atom(x) for x in a]

    def boolean(self, v: int) -> int:
        """Restrict ``v`` to 0..1, as every boolean position requires."""
        if not self.store.restrict(v, 0b11, 0):
            self.root_failed = True
        return v

    def add(self, prop: Any) -> None:
        self.registry[type(prop).__name__] += 1
        self.store.add_prop(prop)

    def post(self, name: str, args: tuple) -> None:
        A = self.atom
        if name in ("int_lin_eq", "int_lin_le", "int_lin_ne"):
            coefs, xs, c = args
            self.add(Linear(coefs, self.array(xs), c, name[8:]))
        elif name == "int_eq":
            self.add(Eq(A(args[0]), A(args[1])))
        elif name == "int_ne":
            self.add(Ne(A(args[0]), A(args[1])))
        elif name == "int_le":
            self.add(Le(A(args[0]), A(args[1])))
        elif name == "int_lt":
            self.add(Le(A(args[0]), A(args[1]), 1))
        elif name in ("int_eq_reif", "int_ne_reif"):
            r = self.boolean(A(args[2]))
            self.add(EqReif(A(args[0]), A(args[1]), r, neg=name == "int_ne_reif"))
        elif name == "int_le_reif":
            self.add(LeReif(A(args[0]), A(args[1]), self.boolean(A(args[2]))))
        elif name == "bool_clause":
            pos = [self.boolean(v) for v in self.array(args[0])]
            neg = [self.boolean(v) for v in self.array(args[1])]
            self.add(Clause(pos, neg))
        elif name == "set_in":
            v = A(args[0])
            m = 0
            for x in args[1]:
                m |= 1 << (x - self.store.off[v]) if x >= self.store.off[v] else 0
            if not self.store.set(v, self.store.doms[v] & m):
                self.root_failed = True
        elif name in ("array_var_int_element", "array_int_element"):
            self.add(Element(A(args[0]), self.array(args[1]), A(args[2])))
        elif name in ("int_times", "int_div", "int_mod", "int_min", "int_max"):
            self.add(Function(name, A(args[0]), A(args[1]), A(args[2])))
        elif name == "int_abs":
            self.add(Function(name, A(args[0]), None, A(args[1])))
        elif name == "lex_lesseq":
            xs, ys = self.array(args[0]), self.array(args[1])
            if len(xs) != len(ys):
                raise FlatError("lex_lesseq needs arrays of equal length")
            self.add(LexLessEq(xs, ys))
        elif name == "regular":
            xs, q, s, table, q0, finals = args
            self.add(Regular(self.array(xs), q, s, table, q0, finals))
        elif name == "global_cardinality":
            self.add(GlobalCardinality(self.array(args[0]), list(args[1]), self.array(args[2])))
        else:
            raise UnsupportedConstraint(f"unsupported constraint: {name}")

    def branch_order(self) -> tuple:
        idx = self.index
        lengths = [idx[n] for n in self.p.outputs.values() if isinstance(n, str)]
        chars = []
        for name in self.p.outputs:
            chars += [idx[c] for c in self.p.arrays[name] if isinstance(c, str)]
        ints = [idx[n] for n in self.p.output_vars]
        seen = set(lengths) | set(chars) | set(ints)
        rest = [idx[n] for n in self.names if idx[n] not in seen]
        self.decision = frozenset(seen)
        return lengths, chars + ints, rest

    # -- propagation and search ----------------------------------------------------

    def propagate(self) -> str:
        if self.root_failed or not self.store.propagate():
            self.root_failed = True
            return FAILED
        return AT_FIXPOINT

    def domain(self, name: str) -> IntDomain:
        return self.store.domain(self.index[name])

    def select(self) -> Optional[int]:
        s = self.store
        lengths, ordered, rest = self.order
        best = None
        for v in lengths:
            if not s.fixed(v):
                n = s.size(v)
                if best is None or n < best[0]:
                    best = (n, v)
        if best is not None:
            return best[1]
        for v in ordered:
            if not s.fixed(v):
                return v
        for v in rest:
            if not s.fixed(v):
                return v
        return None

    def branches(self, v: int) -> list:
        s = self.store
        d = s.doms[v]
        if d.bit_count() > BISECT_ABOVE:
            mid = (s.min(v) + s.max(v)) // 2 - s.off[v]
            low = d & ((1 << (mid + 1)) - 1)
            return [low, d ^ low]
        return [1 << k for k in bits(d)]

    def solution(self) -> Solution:
        s = self.store
        asg = {n: s.value(self.index[n]) for n in self.names}
        self.check(asg)
        strings = {name: decode_string(self.p.arrays[name], length, asg)
                   for name, length in self.p.outputs.items()}
        ints = {n: asg[n] for n in self.p.output_vars}
        obj = None if self.obj is None else s.value(self.obj)
        return Solution(asg, obj, strings, ints)

    def check(self, asg: dict) -> None:
        """Re-evaluate every constraint from the instance text."""
        if self.text is None:
            return
        if not hasattr(self, "_verifier"):
            self._verifier = parse_flat(self.text)
        p = self._verifier
        for c in p.constraints:
            if not check_constraint(c, asg, p.arrays):
                raise VerificationError(f"solution violates {c}")
        for name, dom in p.vars.items():
            if dom is not None and asg[name] not in dom:
                raise VerificationError(f"{name} = {asg[name]} outside its domain")

    def solve(self, all_solutions: bool = False, time_limit: Optional[float] = None,
              node_limit: Optional[int] = None,
              on_solution: Optional[Callable[[Solution], None]] = None) -> Result:
        """Depth-first search; branch-and-bound when the instance has an objective.

        In all-solutions mode each distinct assignment of the string lengths,
        characters and integer variables is reported once.
        """
        if all_solutions and self.kind != "satisfy":
            raise ValueError("all-solutions mode needs a satisfaction problem")
        s = self.store
        stats = SearchStats()
        start = time.perf_counter()
        deadline = None if not time_limit else start + time_limit
        props0 = s.propagations
        found: list = []
        best = None
        minimize = self.kind == "minimize"
        stack: list = []
        root = s.doms[:]
        status = None
        ok = not self.root_failed

        while True:
            if ok and best is not None:
                ok = s.set_max(self.obj, best - 1) if minimize else s.set_min(self.obj, best + 1)
            if ok:
                ok = s.propagate()
            if ok:
                v = self.select()
                if v is None:
                    sol = self.solution()
                    found.append(sol)
                    stats.solutions += 1
                    if on_solution is not None:
                        on_solution(sol)
                    if self.kind == "satisfy" and not all_solutions:
                        status = SATISFIED
                        break
                    if self.obj is not None:
                        best = sol.objective
                    if all_solutions:
                        while stack and stack[-1][3]:
                            stack.pop()
                else:
                    br = self.branches(v)
                    stats.nodes += 1
                    stack.append([s.doms[:], br, 1, v not in self.decision, v])
                    if len(stack) > stats.peak_depth:
                        stats.peak_depth = len(stack)
                    s.set(v, br[0])
                    if deadline is not None and stats.nodes % 16 == 0 \
                            and time.perf_counter() > deadline:
                        status = UNKNOWN
                        break
                    if node_limit is not None and stats.nodes >= node_limit:
                        status = UNKNOWN
                        break
                    continue
            else:
                stats.failures += 1
            # backtrack to the next open alternative
            while stack:
                fr = stack[-1]
                saved, br, k, _, v = fr
                if k < len(br):
                    fr[2] = k + 1
                    if k + 1 == len(br):
                        stack.pop()
                        s.doms = saved
                    else:
                        s.doms = saved[:]
                    s.set(v, br[k])
                    break
                stack.pop()
            else:
                break
            ok = True
        if status is None:
            if not found:
                status = UNSAT
            elif all_solutions:
                status = ALL
            elif self.obj is not None:
                status = OPTIMAL
            else:
                status = SATISFIED
        # leave the store as it was, ready for another run
        s.doms = root
        s.queue.clear()
        for i in range(len(s.queued)):
            s.queued[i] = False
        for p in s.props:
            s.schedule(p)
        stats.propagations = s.propagations - props0
        stats.time = time.perf_counter() - start
        return Result(status, found, stats)


def _eq_classes(flat: ParsedFlat) -> dict:
    """Representative of each variable under the int_eq constraints between variables."""
    parent: dict = {}

    def find(x: str) -> str:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    for c in flat.constraints:
        if c.name == "int_eq" and all(isinstance(a, str) and a in flat.vars for a in c.args):
            a, b = (find(x) for x in c.args)
            if a != b:
                parent[b] = a
    return {x: find(x) for x in parent}


def solve_text(text: str, **kw: Any) -> Result:
    return Solver(text).solve(**kw)

"""String-preserving flattening: string constraints survive as ``str_*`` predicates.

Nested string functions are unnested into auxiliary string variables; integer
subexpressions become the usual FlatZinc integer builtins.  The output never
depends on a length bound.
"""

from __future__ import annotations

from typing import Any, Mapping, Optional

from .flat import FlatConstraint, StrDecl, StrFlatInstance, StrVal
from .flatten_base import BaseFlattener, FlattenError
from .model import (
    ArrayLit, CharAt, Concat, Ident, InSet, IntVarDecl, Model, StrAlphabet, StrDfa, StrGcc,
    StrLit, StrNfa, StrPow, StrRange, StrRev, StrSub, StringVarDecl, to_automaton,
)
from .semantics import int_div, int_mod

STR_PREDICATES = (
    "str_eq", "str_neq", "str_lt", "str_le", "str_ge", "str_gt", "str_in", "str_alphabet",
    "str_range", "str_concat", "str_char_at", "str_sub", "str_pow", "str_rev", "str_len",
    "str_dfa", "str_nfa", "str_gcc",
)

_CMP = {"=": "str_eq", "!=": "str_neq", "<": "str_lt", "<=": "str_le", ">=": "str_ge",
        ">": "str_gt"}


class StrFlattener(BaseFlattener):
    def __init__(self, m: Model):
        super().__init__(m)
        self.out = StrFlatInstance()
        self.known: dict = {}  # name -> (lo, hi)
        self.str_memo: dict = {}

    def post(self, name: str, *args: Any) -> None:
        self.out.constraints.append(FlatConstraint(name, tuple(args)))

    def new_int(self, lo: Optional[int], hi: Optional[int], prefix: str = "_t") -> str:
        name = self.fresh(prefix)
        self.out.decls.append(StrDecl(name, "int", lo=lo, hi=hi, aux=True))
        self.known[name] = (lo, hi)
        return name

    def new_string(self) -> str:
        name = self.fresh("_s")
        self.out.decls.append(StrDecl(name, "string", aux=True))
        return name

    def bounds(self, a: Any) -> tuple:
        if isinstance(a, int):
            return a, a
        return self.known.get(a, (None, None))

    def declare_string(self, d: StringVarDecl) -> None:
        bound = None if d.max_len is None else self.value(d.max_len)
        alpha = None if d.alphabet is None else self.value(d.alphabet)
        self.out.decls.append(StrDecl(d.name, "string", bound=bound, alphabet=alpha))

    def declare_int(self, d: IntVarDecl) -> None:
        dom = self.int_domain(d)
        if dom is None:
            self.out.decls.append(StrDecl(d.name, "int"))
            self.known[d.name] = (None, None)
            return
        lo, hi = min(dom), max(dom)
        contiguous = len(dom) == hi - lo + 1
        self.out.decls.append(StrDecl(d.name, "int", lo=lo, hi=hi,
                                      values=None if contiguous else dom))
        self.known[d.name] = (lo, hi)

    # -- string terms --------------------------------------------------------

    def sterm(self, e: Any, out: Optional[str] = None) -> Any:
        """Flat string argument for ``e``: a variable name or a literal."""
        if isinstance(e, StrLit):
            res: Any = StrVal(e.text)
        elif isinstance(e, Ident):
            v = self.env.get(e.name)
            res = StrVal(v) if isinstance(v, str) else e.name
        elif e in self.str_memo:
            res = self.str_memo[e]
        else:
            target = out if out is not None else self.new_string()
            if isinstance(e, Concat):
                self.post("str_concat", self.sterm(e.lhs), self.sterm(e.rhs), target)
            elif isinstance(e, StrRev):
                self.post("str_rev", self.sterm(e.arg), target)
            elif isinstance(e, StrPow):
                self.post("str_pow", self.sterm(e.arg), self.atom(e.exp), target)
            elif isinstance(e, StrSub):
                self.post("str_sub", self.sterm(e.arg), self.atom(e.lo), self.atom(e.hi), target)
            else:
                raise FlattenError(f"not a string expression: {type(e).__name__}")
            self.str_memo[e] = target
            return target
        if out is not None:
            self.post("str_eq", out, res)
        return res

    def str_len(self, e: Any, out: Any = None) -> Any:
        if out is None:
            out = self.new_int(0, None)
        self.post("str_len", self.sterm(e), out)
        return out

    def char_at(self, e: CharAt, out: Any = None) -> Any:
        if out is None:
            out = self.new_int(1, 128)
        self.post("str_char_at", self.sterm(e.arg), self.atom(e.index), out)
        return out

    def string_compare(self, op: str, lhs: Any, rhs: Any) -> None:
        if op == "=":
            for var, fn in ((lhs, rhs), (rhs, lhs)):
                if (isinstance(var, Ident) and isinstance(self.m.decl(var.name), StringVarDecl)
                        and isinstance(fn, (Concat, StrRev, StrPow, StrSub))
                        and fn not in self.str_memo):
                    self.sterm(fn, out=var.name)
                    return
        self.post(_CMP[op], self.sterm(lhs), self.sterm(rhs))

    def string_constraint(self, c: Any) -> None:
        if isinstance(c, InSet):
            self.post("str_in", self.sterm(c.arg), self.value(c.chars))
        elif isinstance(c, StrAlphabet):
            self.post("str_alphabet", self.sterm(c.arg), self.value(c.chars))
        elif isinstance(c, StrRange):
            self.post("str_range", self.sterm(c.arg), StrVal(self.value(c.lo)),
                      StrVal(self.value(c.hi)))
        elif isinstance(c, (StrDfa, StrNfa)):
            aut = to_automaton(*(self.value(x) for x in (c.q, c.symbols, c.table, c.q0, c.finals)),
                               deterministic=isinstance(c, StrDfa))
            flat_table = tuple(t for row in aut.table for t in row)
            name = "str_dfa" if aut.deterministic else "str_nfa"
            self.post(name, self.sterm(c.arg), aut.q, tuple(StrVal(s) for s in aut.symbols),
                      flat_table, aut.q0, aut.finals)
        elif isinstance(c, StrGcc):
            chars = self.value(c.chars)
            if isinstance(c.counts, ArrayLit):
                counts = tuple(self.atom(x) for x in c.counts.items)
            else:
                counts = tuple(self.value(c.counts))
            self.post("str_gcc", self.sterm(c.arg), tuple(StrVal(ch) for ch in chars), counts)
        else:
            raise FlattenError(f"unsupported constraint {type(c).__name__}")


def flatten_str(m: Model) -> StrFlatInstance:
    """Flatten ``m`` keeping string variables and ``str_*`` predicates."""
    f = StrFlattener(m)
    f.run()
    f.out.solve = f.solve
    return f.out


# -- reference evaluator -------------------------------------------------------


class Stuck(Exception):
    pass


def _lin(a: tuple) -> int:
    return sum(k * v for k, v in zip(a[0], a[1]))


def _functional(name: str, a: list) -> Any:
    """Value of the last argument of a functional predicate, from the others."""
    if name == "str_concat":
        return a[0] + a[1]
    if name == "str_rev":
        return a[0][::-1]
    if name == "str_pow":
        if a[1] < 0:
            return _UNDEF
        return a[0] * a[1]
    if name == "str_sub":
        s, i, j = a
        n, m = max(1, i), min(j, len(s))
        return s[n - 1:m] if m >= n else ""
    if name == "str_len":
        return len(a[0])
    if name == "str_char_at":
        s, n = a
        return ord(s[n - 1]) + 1 if 1 <= n <= len(s) else _UNDEF
    if name == "int_times":
        return a[0] * a[1]
    if name == "int_div":
        return _UNDEF if a[1] == 0 else int_div(a[0], a[1])
    if name == "int_mod":
        return _UNDEF if a[1] == 0 else int_mod(a[0], a[1])
    if name == "int_min":
        return min(a[0], a[1])
    if name == "int_max":
        return max(a[0], a[1])
    if name == "int_abs":
        return abs(a[0])
    if name == "int_eq_reif":
        return int(a[0] == a[1])
    if name == "int_ne_reif":
        return int(a[0] != a[1])
    if name == "int_le_reif":
        return int(a[0] <= a[1])
    raise Stuck(name)


_UNDEF = object()


def _lex(op: str, x: str, y: str) -> bool:
    return {"str_eq": x == y, "str_neq": x != y, "str_lt": x < y, "str_le": x <= y,
            "str_ge": x >= y, "str_gt": x > y}[op]


def _check(name: str, a: list) -> bool:
    if name in _CMP.values():
        return _lex(name, a[0], a[1])
    if name == "str_in":
        return set(a[0]) <= a[1]
    if name == "str_alphabet":
        return set(a[0]) == a[1]
    if name == "str_range":
        return all(a[1] <= c <= a[2] for c in a[0])
    if name in ("str_dfa", "str_nfa"):
        x, q, syms, flat, q0, finals = a
        w = len(syms)
        table = tuple(flat[i * w:(i + 1) * w] for i in range(q))
        aut = to_automaton(q, tuple(syms), table, q0, finals, deterministic=name == "str_dfa")
        return aut.accepts(x)
    if name == "str_gcc":
        return all(a[0].count(ch) == k for ch, k in zip(a[1], a[2]))
    if name == "int_lin_eq":
        return _lin(a) == a[2]
    if name == "int_lin_le":
        return _lin(a) <= a[2]
    if name == "int_lin_ne":
        return _lin(a) != a[2]
    if name == "int_eq":
        return a[0] == a[1]
    if name == "int_ne":
        return a[0] != a[1]
    if name == "int_le":
        return a[0] <= a[1]
    if name == "int_lt":
        return a[0] < a[1]
    if name == "bool_clause":
        return any(v == 1 for v in a[0]) or any(v == 0 for v in a[1])
    v = _functional(name, a[:-1])
    return v is not _UNDEF and v == a[-1]


def _resolve(arg: Any, env: dict) -> Any:
    if isinstance(arg, StrVal):
        return arg.text
    if isinstance(arg, str):
        if arg not in env:
            raise KeyError(arg)
        return env[arg]
    if isinstance(arg, tuple):
        return tuple(_resolve(x, env) for x in arg)
    if isinstance(arg, frozenset) and all(isinstance(x, str) for x in arg):
        return arg
    return arg


def evaluate_instance(inst: StrFlatInstance, assignment: Mapping[str, Any],
                      max_len: Optional[int] = None) -> bool:
    """Does ``assignment`` of the user variables extend to a model of ``inst``?

    Auxiliary variables are computed forward from functional predicates.
    Auxiliary strings longer than ``max_len`` count as undefined.
    """
    env = dict(assignment)
    pending = list(inst.constraints)
    while pending:
        progress = False
        rest = []
        for c in pending:
            try:
                args = [_resolve(x, env) for x in c.args]
            except KeyError:
                out = c.args[-1]
                if not isinstance(out, str) or out in env:
                    rest.append(c)
                    continue
                try:
                    ins = [_resolve(x, env) for x in c.args[:-1]]
                except KeyError:
                    rest.append(c)
                    continue
                v = _functional(c.name, ins)
                if v is _UNDEF:
                    return False
                if isinstance(v, str) and max_len is not None and len(v) > max_len:
                    return False
                env[out] = v
                progress = True
                continue
            if not _check(c.name, args):
                return False
            progress = True
        if not progress:
            if any(c.name == "int_lin_eq" for c in rest):
                _solve_linear(rest, env)
                progress = True
            else:
                raise Stuck(f"cannot evaluate {rest[0]}")
        pending = rest
    return True


def _solve_linear(cs: list, env: dict) -> None:
    for c in cs:
        if c.name != "int_lin_eq":
            continue
        coefs, xs, rhs = c.args
        unknown = [(k, x) for k, x in zip(coefs, xs) if isinstance(x, str) and x not in env]
        if len(unknown) == 1 and abs(unknown[0][0]) == 1:
            k, x = unknown[0]
            rest = sum(kk * _resolve(xx, env) for kk, xx in zip(coefs, xs) if xx != x)
            env[x] = (rhs - rest) * k
            return
    raise Stuck("linear system is not triangular")

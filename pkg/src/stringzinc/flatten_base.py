"""Shared flattening machinery: walking constraints and integer expressions.

Both targets flatten integer expressions the same way, into standard FlatZinc
integer builtins.  Subclasses decide how string expressions are handled.
"""

from __future__ import annotations

from typing import Any, Optional

from .model import (
    And, BinOp, BoolLit, Call, CharAt, Compare, Concat, Generator, Ident, IntLit, IntVarDecl,
    Model, Neg, ParDecl, StrLen, StrLit, StrPow, StrRev, StrSub, StringVarDecl, char_index,
    substitute, validate,
)
from .semantics import EvalError, evaluate


class FlattenError(Exception):
    def __init__(self, message: str, diagnostics: Optional[list] = None):
        self.diagnostics = list(diagnostics or [])
        super().__init__(message)


def check_valid(m: Model) -> None:
    diags = validate(m)
    if diags:
        raise FlattenError("model is not valid:\n" + "\n".join(str(d) for d in diags), diags)


_SWAP = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}
_STRING_NODES = (Concat, StrRev, StrPow, StrSub)


class BaseFlattener:
    def __init__(self, m: Model):
        check_valid(m)
        self.m = m
        self.env = m.param_env()
        self.counter = 0
        self.int_memo: dict = {}
        self.reif_memo: dict = {}

    # -- hooks -------------------------------------------------------------

    def post(self, name: str, *args: Any) -> None:
        raise NotImplementedError

    def new_int(self, lo: Optional[int], hi: Optional[int], prefix: str = "_t") -> str:
        raise NotImplementedError

    def new_bool(self) -> Any:
        return self.new_int(0, 1, "_b")

    def bounds(self, a: Any) -> tuple:
        """Interval of an atom (int literal or variable name)."""
        raise NotImplementedError

    def str_len(self, e: Any, out: Any = None) -> Any:
        raise NotImplementedError

    def char_at(self, e: CharAt, out: Any = None) -> Any:
        raise NotImplementedError

    def string_compare(self, op: str, lhs: Any, rhs: Any) -> None:
        raise NotImplementedError

    def string_constraint(self, c: Any) -> None:
        raise NotImplementedError

    def post_false(self) -> None:
        self.post("bool_clause", (), ())

    # -- helpers -----------------------------------------------------------

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def value(self, e: Any) -> Any:
        try:
            return evaluate(e, self.env)
        except EvalError as exc:
            raise FlattenError(f"cannot evaluate parameter expression: {exc}") from None

    def is_param(self, e: Any) -> bool:
        if isinstance(e, (IntLit, StrLit, BoolLit)):
            return True
        if isinstance(e, Ident):
            return e.name in self.env
        return False

    def is_string(self, e: Any) -> bool:
        if isinstance(e, _STRING_NODES):
            return True
        if isinstance(e, StrLit):
            return len(e.text) != 1
        if isinstance(e, Ident):
            d = self.m.decl(e.name)
            return isinstance(d, StringVarDecl) or isinstance(self.env.get(e.name), str)
        return False

    def is_int(self, e: Any) -> bool:
        return not self.is_string(e) and not isinstance(e, StrLit)

    # -- driver --------------------------------------------------------------

    def constraint(self, c: Any) -> None:
        if isinstance(c, And):
            self.constraint(c.lhs)
            self.constraint(c.rhs)
        elif isinstance(c, BoolLit):
            if not c.value:
                self.post_false()
        elif isinstance(c, Generator):
            lo, hi = self.value(c.lo), self.value(c.hi)
            for i in range(lo, hi + 1):
                self.constraint(substitute(c.body, c.var, IntLit(i)))
        elif isinstance(c, Compare):
            lhs, rhs = c.lhs, c.rhs
            string_side = self.is_string(lhs) or self.is_string(rhs)
            both_lits = isinstance(lhs, StrLit) and isinstance(rhs, StrLit)
            if string_side or both_lits:
                self.string_compare(c.op, lhs, rhs)
            else:
                self.int_compare(c.op, lhs, rhs)
        else:
            self.string_constraint(c)

    # -- integer expressions -----------------------------------------------

    def linear(self, e: Any) -> tuple:
        """(coefficients by atom, constant) for an integer expression."""
        if isinstance(e, IntLit):
            return {}, e.value
        if isinstance(e, StrLit) and len(e.text) == 1:
            return {}, char_index(e.text)
        if isinstance(e, BoolLit):
            return {}, int(e.value)
        if isinstance(e, Ident):
            if e.name in self.env:
                v = self.env[e.name]
                if isinstance(v, str) and len(v) == 1:
                    return {}, char_index(v)
                if not isinstance(v, int):
                    raise FlattenError(f"'{e.name}' is not an integer")
                return {}, v
            return {e.name: 1}, 0
        if isinstance(e, Neg):
            t, c = self.linear(e.arg)
            return {k: -v for k, v in t.items()}, -c
        if isinstance(e, BinOp) and e.op in "+-":
            t1, c1 = self.linear(e.lhs)
            t2, c2 = self.linear(e.rhs)
            sign = 1 if e.op == "+" else -1
            out = dict(t1)
            for k, v in t2.items():
                out[k] = out.get(k, 0) + sign * v
            return {k: v for k, v in out.items() if v}, c1 + sign * c2
        if isinstance(e, BinOp) and e.op == "*":
            t1, c1 = self.linear(e.lhs)
            t2, c2 = self.linear(e.rhs)
            if not t1:
                return {k: c1 * v for k, v in t2.items() if c1 * v}, c1 * c2
            if not t2:
                return {k: c2 * v for k, v in t1.items() if c2 * v}, c1 * c2
        if isinstance(e, Generator) and e.kind == "sum":
            lo, hi = self.value(e.lo), self.value(e.hi)
            out: dict = {}
            const = 0
            for i in range(lo, hi + 1):
                t, c = self.linear(substitute(e.body, e.var, IntLit(i)))
                const += c
                for k, v in t.items():
                    out[k] = out.get(k, 0) + v
            return {k: v for k, v in out.items() if v}, const
        return {self.func(e): 1}, 0

    def lin_bounds(self, terms: dict, const: int) -> tuple:
        lo = hi = const
        for a, k in terms.items():
            blo, bhi = self.bounds(a)
            if blo is None or bhi is None:
                if k > 0:
                    lo = None if blo is None else lo
                    hi = None if bhi is None else hi
                else:
                    lo = None if bhi is None else lo
                    hi = None if blo is None else hi
            if lo is not None and blo is not None and bhi is not None:
                lo += k * (blo if k > 0 else bhi)
            if hi is not None and blo is not None and bhi is not None:
                hi += k * (bhi if k > 0 else blo)
        return lo, hi

    def materialize(self, terms: dict, const: int) -> Any:
        terms = {k: v for k, v in terms.items() if v}
        if not terms:
            return const
        if const == 0 and len(terms) == 1:
            (a, k), = terms.items()
            if k == 1:
                return a
        key = (tuple(sorted(terms.items(), key=lambda kv: str(kv[0]))), const)
        if key in self.int_memo:
            return self.int_memo[key]
        lo, hi = self.lin_bounds(terms, const)
        t = self.new_int(lo, hi)
        atoms = list(terms)
        self.post("int_lin_eq", tuple(terms[a] for a in atoms) + (-1,), tuple(atoms) + (t,),
                  -const)
        self.int_memo[key] = t
        return t

    def atom(self, e: Any) -> Any:
        return self.materialize(*self.linear(e))

    def func(self, e: Any, out: Any = None) -> Any:
        """Flatten a non-linear integer expression, binding its result to ``out``."""
        if e in self.int_memo:
            r = self.int_memo[e]
            if out is not None and out != r:
                self.post("int_eq", out, r)
            return r if out is None else out
        if isinstance(e, StrLen):
            r = self.str_len(e.arg, out)
        elif isinstance(e, CharAt):
            r = self.char_at(e, out)
        elif isinstance(e, BinOp):
            a, b = self.atom(e.lhs), self.atom(e.rhs)
            name = {"*": "int_times", "div": "int_div", "mod": "int_mod"}[e.op]
            if out is None:
                out = self.new_int(*self.op_bounds(e.op, a, b))
            self.post(name, a, b, out)
            r = out
        elif isinstance(e, Call) and e.name in ("min", "max"):
            a, b = self.atom(e.args[0]), self.atom(e.args[1])
            if out is None:
                (alo, ahi), (blo, bhi) = self.bounds(a), self.bounds(b)
                f = min if e.name == "min" else max
                lo = None if alo is None or blo is None else f(alo, blo)
                hi = None if ahi is None or bhi is None else f(ahi, bhi)
                out = self.new_int(lo, hi)
            self.post(f"int_{e.name}", a, b, out)
            r = out
        elif isinstance(e, Call) and e.name == "abs":
            a = self.atom(e.args[0])
            if out is None:
                lo, hi = self.bounds(a)
                m = None if lo is None or hi is None else max(abs(lo), abs(hi))
                out = self.new_int(0, m)
            self.post("int_abs", a, out)
            r = out
        elif isinstance(e, Call) and e.name == "bool2int":
            r = self.reify(e.args[0])
            if out is not None:
                self.post("int_eq", out, r)
                r = out
        elif isinstance(e, Generator) or isinstance(e, (IntLit, Ident, Neg, BinOp)):
            r = self.atom(e)
            if out is not None:
                self.post("int_eq", out, r)
                r = out
        else:
            raise FlattenError(f"unsupported integer expression {type(e).__name__}")
        self.int_memo[e] = r
        return r

    def op_bounds(self, op: str, a: Any, b: Any) -> tuple:
        (alo, ahi), (blo, bhi) = self.bounds(a), self.bounds(b)
        if None in (alo, ahi, blo, bhi):
            if op == "mod" and blo is not None and bhi is not None:
                k = max(abs(blo), abs(bhi))
                return -(k - 1), k - 1
            return None, None
        if op == "*":
            ps = [alo * blo, alo * bhi, ahi * blo, ahi * bhi]
            return min(ps), max(ps)
        if op == "div":
            k = max(abs(alo), abs(ahi))
            return -k, k
        k = max(abs(blo), abs(bhi))
        if alo >= 0:
            return 0, max(0, min(k - 1, ahi))
        return -(k - 1), k - 1

    def simple(self, e: Any) -> bool:
        return isinstance(e, (IntLit, Ident)) or (isinstance(e, StrLit) and len(e.text) == 1)

    def functional(self, e: Any) -> bool:
        return (isinstance(e, (StrLen, CharAt)) or (isinstance(e, BinOp) and e.op in ("div", "mod"))
                or (isinstance(e, Call) and e.name in ("min", "max", "abs", "bool2int")))

    def int_compare(self, op: str, lhs: Any, rhs: Any) -> None:
        if op == "=" and self.functional(lhs) and self.simple(rhs) and lhs not in self.int_memo:
            self.func(lhs, self.atom(rhs))
            return
        if op == "=" and self.functional(rhs) and self.simple(lhs) and rhs not in self.int_memo:
            self.func(rhs, self.atom(lhs))
            return
        if self.simple(lhs) and self.simple(rhs) or (
                isinstance(lhs, (StrLen, CharAt)) or isinstance(rhs, (StrLen, CharAt))) and \
                self.simple_or_func(lhs) and self.simple_or_func(rhs):
            a, b = self.atom(lhs), self.atom(rhs)
            self.binary(op, a, b)
            return
        t1, c1 = self.linear(lhs)
        t2, c2 = self.linear(rhs)
        terms = dict(t1)
        for k, v in t2.items():
            terms[k] = terms.get(k, 0) - v
        terms = {k: v for k, v in terms.items() if v}
        c = c2 - c1  # sum(terms) op c
        if not terms:
            if not _holds(op, 0, c):
                self.post_false()
            return
        if len(terms) == 1:
            (a, k), = terms.items()
            if k == 1:
                self.binary(op, a, c)
                return
            if k == -1:
                self.binary(_SWAP[op], a, -c)
                return
        if len(terms) == 2 and c == 0:
            (a, ka), (b, kb) = terms.items()
            if ka == 1 and kb == -1:
                self.binary(op, a, b)
                return
            if ka == -1 and kb == 1:
                self.binary(op, b, a)
                return
        atoms = list(terms)
        coefs = tuple(terms[a] for a in atoms)
        if op in ("=", "!="):
            self.post("int_lin_eq" if op == "=" else "int_lin_ne", coefs, tuple(atoms), c)
        elif op in ("<=", "<"):
            self.post("int_lin_le", coefs, tuple(atoms), c if op == "<=" else c - 1)
        else:
            neg = tuple(-k for k in coefs)
            self.post("int_lin_le", neg, tuple(atoms), -c if op == ">=" else -c - 1)

    def simple_or_func(self, e: Any) -> bool:
        return self.simple(e) or isinstance(e, (StrLen, CharAt))

    def binary(self, op: str, a: Any, b: Any) -> None:
        if isinstance(a, int) and isinstance(b, int):
            if not _holds(op, a, b):
                self.post_false()
            return
        if op == "=":
            self.post("int_eq", a, b)
        elif op == "!=":
            self.post("int_ne", a, b)
        elif op == "<=":
            self.post("int_le", a, b)
        elif op == "<":
            self.post("int_lt", a, b)
        elif op == ">=":
            self.post("int_le", b, a)
        elif op == ">":
            self.post("int_lt", b, a)

    def reify(self, c: Any) -> Any:
        """0/1 atom equal to the truth of integer comparison ``c``."""
        if isinstance(c, BoolLit):
            return int(c.value)
        if not isinstance(c, Compare):
            raise FlattenError(f"cannot reify {type(c).__name__}; only integer comparisons")
        if self.is_string(c.lhs) or self.is_string(c.rhs):
            raise FlattenError("string comparisons cannot be reified")
        if c in self.reif_memo:
            return self.reif_memo[c]
        a, b = self.atom(c.lhs), self.atom(c.rhs)
        if isinstance(a, int) and isinstance(b, int):
            return int(_holds(c.op, a, b))
        r = self.new_bool()
        op = c.op
        if op == "=":
            self.post("int_eq_reif", a, b, r)
        elif op == "!=":
            self.post("int_ne_reif", a, b, r)
        elif op == "<=":
            self.post("int_le_reif", a, b, r)
        elif op == ">=":
            self.post("int_le_reif", b, a, r)
        else:
            lo, hi = (a, b) if op == "<" else (b, a)
            # lo < hi  <->  lo - hi <= -1
            d = self.materialize({lo: 1, hi: -1} if not isinstance(lo, int) and not isinstance(hi, int)
                                 else _diff_terms(lo, hi)[0], _diff_terms(lo, hi)[1])
            self.post("int_le_reif", d, -1, r)
        self.reif_memo[c] = r
        return r

    # -- declarations --------------------------------------------------------

    def declarations(self) -> None:
        for d in self.m.decls:
            if isinstance(d, StringVarDecl):
                self.declare_string(d)
            elif isinstance(d, IntVarDecl):
                self.declare_int(d)
            elif not isinstance(d, ParDecl):
                raise FlattenError(f"unknown declaration {d!r}")
        for d in self.m.decls:
            if isinstance(d, StringVarDecl) and d.value is not None:
                self.string_compare("=", Ident(d.name), d.value)
            elif isinstance(d, IntVarDecl) and d.value is not None:
                self.int_compare("=", Ident(d.name), d.value)

    def int_domain(self, d: IntVarDecl) -> Optional[frozenset]:
        if d.domain is None:
            return None
        return frozenset(self.value(d.domain))

    def declare_string(self, d: StringVarDecl) -> None:
        raise NotImplementedError

    def declare_int(self, d: IntVarDecl) -> None:
        raise NotImplementedError

    def objective(self) -> tuple:
        s = self.m.solve_item
        if s.kind == "satisfy":
            return ("satisfy", None)
        return (s.kind, self.atom(s.objective))

    def run(self) -> None:
        self.declarations()
        for c in self.m.constraints:
            self.constraint(c)
        self.solve = self.objective()


def _diff_terms(lo: Any, hi: Any) -> tuple:
    terms: dict = {}
    const = 0
    for a, k in ((lo, 1), (hi, -1)):
        if isinstance(a, int):
            const += k * a
        else:
            terms[a] = terms.get(a, 0) + k
    return terms, const


def _holds(op: str, a: int, b: int) -> bool:
    return {
        "=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
    }[op]

"""Integer flattening: every string becomes a zero-padded array plus a length.

A string ``x`` with capacity ``n`` is lowered to ``n`` character variables over
``{0} | codes(alphabet)`` and a length variable over ``0..n``.  Position ``i``
holds 0 exactly when ``i`` lies past the length (the padding law).  String
constants lower to the same shape with integer literals in place of variables,
so every rule below handles them without special cases.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Optional

from .flat import FlatConstraint, IntFlatInstance, OutputString
from .flatten_base import BaseFlattener, FlattenError
from .model import (
    ArrayLit, CharAt, Concat, DEFAULT_STATE_CAP, Ident, InSet, IntVarDecl, Model, StateCapExceeded,
    StrAlphabet, StrDfa, StrGcc, StrLit, StrNfa, StrPow, StrRange, StrRev, StrSub, StringVarDecl,
    char_index, determinize, to_automaton,
)

DEFAULT_MAX_LEN = 1000
INT_BOUND = 10 ** 6
ENV_MAX_LEN = "STRINGZINC_MAX_LEN"


def default_max_len() -> int:
    raw = os.environ.get(ENV_MAX_LEN)
    if raw is None:
        return DEFAULT_MAX_LEN
    try:
        v = int(raw)
    except ValueError:
        raise FlattenError(f"{ENV_MAX_LEN} must be an integer, got {raw!r}") from None
    if v < 1:
        raise FlattenError(f"{ENV_MAX_LEN} must be positive, got {v}")
    return v


@dataclass(frozen=True)
class LoweredString:
    chars: tuple  # variable names or integer literals, one per position
    length: Any  # variable name or integer literal
    pads: tuple  # pads[i] is 1 iff position i+1 lies past the length
    codes: frozenset  # character codes that may occur (0 excluded)

    @property
    def cap(self) -> int:
        return len(self.chars)


def literal(text: str) -> LoweredString:
    codes = tuple(char_index(c) for c in text)
    return LoweredString(codes, len(text), (0,) * len(text), frozenset(codes))


class IntFlattener(BaseFlattener):
    def __init__(self, m: Model, max_len: Optional[int] = None, state_cap: int = DEFAULT_STATE_CAP):
        super().__init__(m)
        self.max_len = default_max_len() if max_len is None else max_len
        if not isinstance(self.max_len, int) or self.max_len < 1:
            raise FlattenError(f"maximum string length must be a positive integer, got {max_len!r}")
        self.state_cap = state_cap
        self.out = IntFlatInstance()
        self.strings: dict = {}
        self.str_memo: dict = {}
        self.eq_reifs: dict = {}
        self.alias: dict = {}

    # -- variables -------------------------------------------------------------

    def post(self, name: str, *args: Any) -> None:
        self.out.constraints.append(FlatConstraint(name, tuple(args)))

    def new_int(self, lo: Optional[int], hi: Optional[int], prefix: str = "_t",
                values: Optional[frozenset] = None, role: str = "aux") -> str:
        lo = -INT_BOUND if lo is None else lo
        hi = INT_BOUND if hi is None else hi
        if lo > hi:
            lo, hi = hi, hi
            self.post_false()
        name = self.fresh(prefix)
        return self.out.add_var(name, lo, hi, values, role)

    def new_bool(self) -> str:
        return self.new_int(0, 1, "_b", role="bool")

    def bounds(self, a: Any) -> tuple:
        if isinstance(a, int):
            return a, a
        v = self.out.vars[a]
        return v.lo, v.hi

    def domain(self, a: Any) -> frozenset:
        if isinstance(a, int):
            return frozenset({a})
        return self.out.vars[a].domain_values()

    def declare_int(self, d: IntVarDecl) -> None:
        dom = self.int_domain(d)
        if dom is None:
            self.out.add_var(d.name, -INT_BOUND, INT_BOUND, role="int")
        else:
            self.out.add_var(d.name, min(dom), max(dom), dom, role="int")
        self.out.ints.append(d.name)

    def declare_string(self, d: StringVarDecl) -> None:
        ell = self.max_len
        if d.max_len is None:
            cap = ell
            self.warn(f"string variable '{d.name}' has no length bound; "
                      f"truncated to maximum length {ell}")
        else:
            bound = self.value(d.max_len)
            cap = min(bound, ell)
            if bound > ell:
                self.warn(f"string variable '{d.name}' declared with bound {bound}; "
                          f"truncated to maximum length {ell}")
        alpha = None if d.alphabet is None else self.value(d.alphabet)
        codes = frozenset(range(1, 129)) if alpha is None else frozenset(map(char_index, alpha))
        s = self.new_string(cap, codes, f"_X_{d.name}_", f"_L_{d.name}", "char", "length")
        self.strings[d.name] = s
        self.out.strings.append(OutputString(d.name, s.chars, s.length))

    def warn(self, msg: str) -> None:
        self.out.warnings.append(msg)

    def new_string(self, cap: int, codes: frozenset, prefix: Optional[str] = None,
                   len_name: Optional[str] = None, char_role: str = "aux",
                   len_role: str = "aux") -> LoweredString:
        if prefix is None:
            self.counter += 1
            prefix = f"_X__s{self.counter}_"
            len_name = f"_L__s{self.counter}"
        length = self.out.add_var(len_name, 0, cap, role=len_role)
        dom = frozenset(codes) | {0}
        chars = []
        pads = []
        for i in range(1, cap + 1):
            x = self.out.add_var(f"{prefix}{i}", 0, 128, dom, role=char_role)
            p = self.out.add_var(f"_P_{prefix[3:]}{i}", 0, 1, role="bool")
            # p <-> i > length <-> x = 0
            self.post("int_le_reif", length, i - 1, p)
            self.post("int_eq_reif", x, 0, p)
            chars.append(x)
            pads.append(p)
        return LoweredString(tuple(chars), length, tuple(pads), frozenset(codes))

    # -- small constraint helpers -----------------------------------------------

    def find(self, a: Any) -> Any:
        while a in self.alias:
            a = self.alias[a]
        return a

    def eq(self, a: Any, b: Any) -> None:
        """a = b; an auxiliary variable equal to another variable is merged into it."""
        if a == b:
            return
        if isinstance(a, str) and isinstance(b, str):
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                return
            va, vb = self.out.vars[ra], self.out.vars[rb]
            if va.role in _AUX_ROLES or vb.role in _AUX_ROLES:
                keep, drop = (vb, va) if va.role in _AUX_ROLES else (va, vb)
                common = keep.domain_values() & drop.domain_values()
                if not common:
                    self.post_false()
                    return
                keep.lo, keep.hi = min(common), max(common)
                keep.values = None if len(common) == keep.hi - keep.lo + 1 else common
                self.alias[drop.name] = keep.name
                return
        self.binary("=", a, b)

    def finish(self) -> None:
        """Rewrite merged variables to their representatives."""
        if not self.alias:
            return
        find = self.find

        def sub(x: Any) -> Any:
            if isinstance(x, str):
                return find(x)
            if isinstance(x, tuple):
                return tuple(sub(y) for y in x)
            return x

        out = self.out
        old = out.constraints
        out.constraints = []
        for c in old:
            args = sub(c.args)
            if c.name.startswith("int_lin_"):
                terms, const = _terms(list(zip(args[0], args[1])), -args[2])
                if not terms:
                    ok = {"int_lin_eq": const == 0, "int_lin_le": const <= 0,
                          "int_lin_ne": const != 0}[c.name]
                    if not ok:
                        self.post_false()
                    continue
                names = list(terms)
                args = (tuple(terms[n] for n in names), tuple(names), -const)
            elif c.name in ("int_eq", "int_le") and args[0] == args[1]:
                continue
            out.constraints.append(FlatConstraint(c.name, args))
        for name in self.alias:
            del out.vars[name]
        out.strings = [OutputString(s.name, sub(s.chars), sub(s.length)) for s in out.strings]
        if self.solve[1] is not None:
            self.solve = (self.solve[0], sub(self.solve[1]))

    def lin_eq(self, terms: list, const: int) -> None:
        """Post sum(k * a) = const for ``terms`` of (k, atom)."""
        acc: dict = {}
        for k, a in terms:
            if isinstance(a, int):
                const -= k * a
            else:
                acc[a] = acc.get(a, 0) + k
        acc = {a: k for a, k in acc.items() if k}
        if not acc:
            if const != 0:
                self.post_false()
            return
        if len(acc) == 1:
            (a, k), = acc.items()
            if const % k:
                self.post_false()
            else:
                self.eq(a, const // k)
            return
        if len(acc) == 2 and const == 0:
            (a, ka), (b, kb) = acc.items()
            if ka == -kb and abs(ka) == 1:
                self.eq(a, b)
                return
        names = list(acc)
        self.post("int_lin_eq", tuple(acc[a] for a in names), tuple(names), const)

    def eq_reif(self, a: Any, b: Any) -> Any:
        """0/1 atom for a = b."""
        if isinstance(a, int) and isinstance(b, int):
            return int(a == b)
        if a == b:
            return 1
        if not (self.domain(a) & self.domain(b)):
            return 0
        key = (a, b) if str(a) <= str(b) else (b, a)
        if key in self.eq_reifs:
            return self.eq_reifs[key]
        r = self.new_bool()
        self.post("int_eq_reif", a, b, r)
        self.eq_reifs[key] = r
        return r

    def ne_reif(self, a: Any, b: Any) -> Any:
        if isinstance(a, int) and isinstance(b, int):
            return int(a != b)
        if a == b:
            return 0
        r = self.new_bool()
        self.post("int_ne_reif", a, b, r)
        return r

    def clause(self, pos: list, neg: list = ()) -> None:
        """At least one of ``pos`` is 1 or one of ``neg`` is 0."""
        if any(p == 1 for p in pos) or any(n == 0 for n in neg):
            return
        pos = [p for p in pos if p != 0]
        neg = [n for n in neg if n != 1]
        if not pos and not neg:
            self.post_false()
        elif len(pos) == 1 and not neg:
            self.eq(pos[0], 1)
        elif len(neg) == 1 and not pos:
            self.eq(neg[0], 0)
        else:
            self.post("bool_clause", tuple(pos), tuple(neg))

    def element(self, idx: Any, arr: tuple, val: Any = None) -> Any:
        """Atom equal to arr[idx] (1-based); bound to ``val`` when given."""
        if isinstance(idx, int):
            if not 1 <= idx <= len(arr):
                self.post_false()
                return 0 if val is None else val
            if val is None:
                return arr[idx - 1]
            self.eq(val, arr[idx - 1])
            return val
        if val is None:
            dom = frozenset().union(*(self.domain(a) for a in arr)) if arr else frozenset({0})
            val = self.new_int(min(dom), max(dom), values=dom)
        self.post("array_var_int_element", idx, tuple(arr), val)
        return val

    def offset(self, atom: Any, k: int) -> Any:
        """Atom for atom + k."""
        if isinstance(atom, int):
            return atom + k
        if k == 0:
            return atom
        return self.materialize({atom: 1}, k)

    def mirror(self, atom: Any, k: int) -> Any:
        """Atom for k - atom."""
        if isinstance(atom, int):
            return k - atom
        return self.materialize({atom: -1}, k)

    def le(self, a: Any, b: Any) -> None:
        self.binary("<=", a, b)

    # -- string expressions -----------------------------------------------------

    def lower(self, e: Any, out: Optional[LoweredString] = None) -> LoweredString:
        if isinstance(e, StrLit):
            res = literal(e.text)
        elif isinstance(e, Ident):
            if e.name in self.strings:
                res = self.strings[e.name]
            else:
                v = self.env.get(e.name)
                if not isinstance(v, str):
                    raise FlattenError(f"'{e.name}' is not a string")
                res = literal(v)
        elif e in self.str_memo:
            res = self.str_memo[e]
        else:
            if isinstance(e, Concat):
                res = self.lower_concat(self.lower(e.lhs), self.lower(e.rhs), out)
            elif isinstance(e, StrRev):
                res = self.lower_rev(self.lower(e.arg), out)
            elif isinstance(e, StrPow):
                res = self.lower_pow(self.lower(e.arg), self.atom(e.exp), out)
            elif isinstance(e, StrSub):
                res = self.lower_substr(self.lower(e.arg), self.atom(e.lo), self.atom(e.hi), out)
            else:
                raise FlattenError(f"not a string expression: {type(e).__name__}")
            self.str_memo[e] = res
            return res
        if out is not None:
            self.lower_eq(out, res)
        return res

    def result(self, out: Optional[LoweredString], cap: int, codes: frozenset) -> LoweredString:
        if out is not None:
            return out
        return self.new_string(max(0, min(cap, self.max_len)), codes)

    def lower_concat(self, a: LoweredString, b: LoweredString,
                     out: Optional[LoweredString] = None) -> LoweredString:
        z = self.result(out, a.cap + b.cap, a.codes | b.codes)
        self.lin_eq([(1, a.length), (1, b.length), (-1, z.length)], 0)
        for i in range(min(a.cap, z.cap)):
            # i+1 <= |a|  ->  z[i+1] = a[i+1]
            self.clause([a.pads[i], self.eq_reif(z.chars[i], a.chars[i])])
        width = max(z.cap, a.cap + b.cap)
        zext = z.chars + (0,) * (width - z.cap)
        for j in range(1, b.cap + 1):
            self.element(self.offset(a.length, j), zext, b.chars[j - 1])
        return z

    def lower_rev(self, a: LoweredString, out: Optional[LoweredString] = None) -> LoweredString:
        y = self.result(out, a.cap, a.codes)
        self.eq(y.length, a.length)
        p = max(a.cap, y.cap)
        aext = (0,) * p + a.chars
        for i in range(1, y.cap + 1):
            self.element(self.offset(a.length, p + 1 - i), aext, y.chars[i - 1])
        return y

    def lower_substr(self, a: LoweredString, i: Any, j: Any,
                     out: Optional[LoweredString] = None) -> LoweredString:
        if isinstance(i, int) and isinstance(j, int):
            cap = max(0, min(a.cap, j) - max(1, i) + 1)
        else:
            cap = a.cap
        y = self.result(out, cap, a.codes)
        # start = min(max(1, i), |a|cap + 1); stop = min(|a|, j)
        start = self.clamp_start(i, a.cap)
        stop = self.int_fn("int_min", a.length, j)
        span = self.materialize(*_terms([(1, stop), (-1, start)], 1))
        self.bind_fn("int_max", 0, span, y.length)
        aext = a.chars + (0,) * y.cap
        for k in range(1, y.cap + 1):
            t = self.element(self.offset(start, k - 1), aext)
            self.clause([y.pads[k - 1], self.eq_reif(y.chars[k - 1], t)])
        return y

    def clamp_start(self, i: Any, cap: int) -> Any:
        if isinstance(i, int):
            return min(max(1, i), cap + 1)
        return self.int_fn("int_min", self.int_fn("int_max", 1, i), cap + 1)

    def int_fn(self, name: str, a: Any, b: Any) -> Any:
        if isinstance(a, int) and isinstance(b, int):
            return min(a, b) if name == "int_min" else max(a, b)
        (alo, ahi), (blo, bhi) = self.bounds(a), self.bounds(b)
        f = min if name == "int_min" else max
        if name == "int_min" and ahi <= blo:
            return a
        if name == "int_min" and bhi <= alo:
            return b
        if name == "int_max" and alo >= bhi:
            return a
        if name == "int_max" and blo >= ahi:
            return b
        key = (name, a, b)
        if key in self.int_memo:
            return self.int_memo[key]
        r = self.new_int(f(alo, blo), f(ahi, bhi))
        self.post(name, a, b, r)
        self.int_memo[key] = r
        return r

    def bind_fn(self, name: str, a: Any, b: Any, out: Any) -> None:
        r = self.int_fn(name, a, b)
        self.eq(out, r)

    def lower_pow(self, a: LoweredString, n: Any,
                  out: Optional[LoweredString] = None) -> LoweredString:
        nlo, nhi = self.bounds(n)
        y = self.result(out, max(0, nhi) * a.cap, a.codes)
        self.le(0, n)
        if isinstance(n, int):
            self.lin_eq([(n, a.length), (-1, y.length)], 0)
        elif isinstance(a.length, int):
            self.lin_eq([(a.length, n), (-1, y.length)], 0)
        else:
            self.post("int_times", n, a.length, y.length)
        for p in range(1, min(a.cap, y.cap) + 1):
            # p <= |y| and p <= |a|  ->  y[p] = a[p]
            self.clause([y.pads[p - 1], a.pads[p - 1],
                         self.eq_reif(y.chars[p - 1], a.chars[p - 1])])
        yext = (0,) * a.cap + y.chars
        for p in range(1, y.cap + 1):
            # p <= |y| and p > |a|  ->  y[p] = y[p - |a|]
            pa = a.pads[p - 1] if p <= a.cap else 1
            if pa == 0:
                continue
            t = self.element(self.mirror(a.length, p + a.cap), yext)
            self.clause([y.pads[p - 1], self.eq_reif(y.chars[p - 1], t)], [pa])
        return y

    # -- hooks for integer-valued string forms ------------------------------------

    def str_len(self, e: Any, out: Any = None) -> Any:
        s = self.lower(e)
        if out is not None:
            self.eq(out, s.length)
            return out
        return s.length

    def char_at(self, e: CharAt, out: Any = None) -> Any:
        s = self.lower(e.arg)
        n = self.atom(e.index)
        self.le(1, n)
        self.le(n, s.length)
        if isinstance(n, int):
            if not 1 <= n <= s.cap:
                self.post_false()
                return 1 if out is None else out
            v = s.chars[n - 1]
            if out is not None:
                self.eq(out, v)
                return out
            return v
        if out is None:
            dom = frozenset(s.codes) or frozenset({1})
            out = self.new_int(min(dom), max(dom), values=dom)
        self.element(n, s.chars, out)
        return out

    # -- string constraints ------------------------------------------------------

    def string_compare(self, op: str, lhs: Any, rhs: Any) -> None:
        if op == "=":
            for var, fn in ((lhs, rhs), (rhs, lhs)):
                if (isinstance(var, Ident) and var.name in self.strings
                        and isinstance(fn, (Concat, StrRev, StrPow, StrSub))
                        and fn not in self.str_memo):
                    self.lower(fn, out=self.strings[var.name])
                    return
        a, b = self.lower(lhs), self.lower(rhs)
        if op == "=":
            self.lower_eq(a, b)
        elif op == "!=":
            self.lower_neq(a, b)
        elif op in ("<=", "<"):
            self.lower_order(a, b, op == "<")
        else:
            self.lower_order(b, a, op == ">")

    def lower_eq(self, a: LoweredString, b: LoweredString) -> None:
        if a is b:
            return
        self.eq(a.length, b.length)
        for i in range(min(a.cap, b.cap)):
            self.eq(a.chars[i], b.chars[i])

    def lower_neq(self, a: LoweredString, b: LoweredString) -> None:
        lits = [self.ne_reif(a.length, b.length)]
        for i in range(min(a.cap, b.cap)):
            lits.append(self.ne_reif(a.chars[i], b.chars[i]))
        self.clause(lits)

    def lower_order(self, a: LoweredString, b: LoweredString, strict: bool) -> None:
        n = max(a.cap, b.cap)
        xs = a.chars + (0,) * (n - a.cap)
        ys = b.chars + (0,) * (n - b.cap)
        if all(isinstance(v, int) for v in xs + ys):
            if not (list(xs) < list(ys) if strict else list(xs) <= list(ys)):
                self.post_false()
            return
        self.post("lex_lesseq", xs, ys)
        if strict:
            self.lower_neq(a, b)

    def string_constraint(self, c: Any) -> None:
        if isinstance(c, InSet):
            self.lower_charset(self.lower(c.arg), self.value(c.chars), exact=False)
        elif isinstance(c, StrAlphabet):
            self.lower_charset(self.lower(c.arg), self.value(c.chars), exact=True)
        elif isinstance(c, StrRange):
            lo, hi = char_index(self.value(c.lo)), char_index(self.value(c.hi))
            chars = frozenset(chr(k - 1) for k in range(lo, hi + 1))
            self.lower_charset(self.lower(c.arg), chars, exact=False)
        elif isinstance(c, (StrDfa, StrNfa)):
            aut = to_automaton(*(self.value(x) for x in (c.q, c.symbols, c.table, c.q0, c.finals)),
                               deterministic=isinstance(c, StrDfa))
            self.lower_regular(self.lower(c.arg), aut)
        elif isinstance(c, StrGcc):
            chars = self.value(c.chars)
            if isinstance(c.counts, ArrayLit):
                counts = tuple(self.atom(x) for x in c.counts.items)
            else:
                counts = tuple(self.value(c.counts))
            self.lower_gcc(self.lower(c.arg), chars, counts)
        else:
            raise FlattenError(f"unsupported constraint {type(c).__name__}")

    def lower_charset(self, a: LoweredString, chars: frozenset, exact: bool) -> None:
        codes = frozenset(map(char_index, chars))
        allowed = codes | {0}
        for x in a.chars:
            if not self.domain(x) <= allowed:
                if isinstance(x, int):
                    self.post_false()
                else:
                    self.post("set_in", x, allowed)
        if exact:
            for c in sorted(codes):
                self.clause([self.eq_reif(x, c) for x in a.chars])

    def lower_regular(self, a: LoweredString, aut: Any) -> None:
        try:
            dfa = determinize(aut, self.state_cap)
        except StateCapExceeded as exc:
            raise FlattenError(str(exc)) from None
        if all(isinstance(x, int) for x in a.chars):
            word = "".join(chr(x - 1) for x in a.chars)
            if not dfa.accepts(word):
                self.post_false()
            return
        order = sorted(range(len(dfa.symbols)), key=lambda j: char_index(dfa.symbols[j]))
        codes = tuple(char_index(dfa.symbols[j]) for j in order)
        s = len(codes) + 1
        table = []
        for i in range(1, dfa.q + 1):
            row = dfa.table[i - 1]
            table.append(i if i in dfa.finals else 0)
            table.extend(row[j] for j in order)
        symbols = []
        channel = (0,) + codes
        for x in a.chars:
            if isinstance(x, int):
                sym = channel.index(x) + 1 if x in channel else None
                if sym is None:
                    self.post_false()
                    return
                symbols.append(sym)
                continue
            v = self.new_int(1, s, "_Y", role="symbol")
            self.element(v, channel, x)
            symbols.append(v)
        self.post("regular", tuple(symbols), dfa.q, s, tuple(table), dfa.q0, dfa.finals)

    def lower_gcc(self, a: LoweredString, chars: tuple, counts: tuple) -> None:
        self.post("global_cardinality", a.chars, tuple(char_index(c) for c in chars), counts)


_AUX_ROLES = ("aux", "bool", "symbol")


def _terms(pairs: list, const: int) -> tuple:
    terms: dict = {}
    for k, a in pairs:
        if isinstance(a, int):
            const += k * a
        else:
            terms[a] = terms.get(a, 0) + k
    return {a: k for a, k in terms.items() if k}, const


def flatten_int(m: Model, max_len: Optional[int] = None,
                state_cap: int = DEFAULT_STATE_CAP) -> IntFlatInstance:
    """Lower ``m`` to a pure integer instance with strings capped at ``max_len``."""
    f = IntFlattener(m, max_len, state_cap)
    f.run()
    f.finish()
    f.out.solve = f.solve
    return f.out

"""AST for string models, the ASCII character index, and model validation.

All nodes are frozen dataclasses.  Source spans are carried on every node but
excluded from equality and hashing, so structurally equal expressions compare
equal regardless of where they were written.  The flatteners rely on this for
common subexpression elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Iterator, Mapping, Optional, Union

ASCII_SIZE = 128
PAD = 0


class CharDomainError(ValueError):
    pass


def char_index(c: str) -> int:
    """1-based position of ``c`` in the ASCII table (so ``'a'`` maps to 98)."""
    if len(c) != 1 or ord(c) >= ASCII_SIZE:
        raise CharDomainError(f"not an ASCII character: {c!r}")
    return ord(c) + 1


def char_of(k: int) -> str:
    if not 1 <= k <= ASCII_SIZE:
        raise CharDomainError(f"character code out of range: {k}")
    return chr(k - 1)


def is_ascii(text: str) -> bool:
    return all(ord(c) < ASCII_SIZE for c in text)


FULL_ASCII = frozenset(chr(i) for i in range(ASCII_SIZE))


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    file: Optional[str] = None

    def __str__(self) -> str:
        prefix = f"{self.file}:" if self.file else ""
        return f"{prefix}{self.line}:{self.column}"


def _span() -> Any:
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = _span()


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class StrLit(Node):
    text: str


@dataclass(frozen=True)
class SetLit(Node):
    items: tuple


@dataclass(frozen=True)
class ArrayLit(Node):
    items: tuple


@dataclass(frozen=True)
class Array2dLit(Node):
    rows: tuple


@dataclass(frozen=True)
class RangeLit(Node):
    lo: Any
    hi: Any


@dataclass(frozen=True)
class Ident(Node):
    name: str


@dataclass(frozen=True)
class BinOp(Node):
    """Integer arithmetic: ``+ - * div mod``."""

    op: str
    lhs: Any
    rhs: Any


@dataclass(frozen=True)
class Neg(Node):
    arg: Any


@dataclass(frozen=True)
class Call(Node):
    """Integer builtins (``min``, ``max``, ``abs``, ``bool2int``) and unknown calls."""

    name: str
    args: tuple


@dataclass(frozen=True)
class Generator(Node):
    """``sum(i in lo..hi)(body)`` or ``forall(i in lo..hi)(body)``."""

    kind: str
    var: str
    lo: Any
    hi: Any
    body: Any


@dataclass(frozen=True)
class Concat(Node):
    lhs: Any
    rhs: Any


@dataclass(frozen=True)
class StrLen(Node):
    arg: Any


@dataclass(frozen=True)
class StrRev(Node):
    arg: Any


@dataclass(frozen=True)
class StrPow(Node):
    arg: Any
    exp: Any


@dataclass(frozen=True)
class StrSub(Node):
    arg: Any
    lo: Any
    hi: Any


@dataclass(frozen=True)
class CharAt(Node):
    """Character access ``x[n]``; integer valued (the character code)."""

    arg: Any
    index: Any


# -- constraint forms --------------------------------------------------------

COMPARE_OPS = ("=", "!=", "<", "<=", ">=", ">")


@dataclass(frozen=True)
class Compare(Node):
    op: str
    lhs: Any
    rhs: Any


@dataclass(frozen=True)
class And(Node):
    lhs: Any
    rhs: Any


@dataclass(frozen=True)
class InSet(Node):
    arg: Any
    chars: Any


@dataclass(frozen=True)
class StrAlphabet(Node):
    arg: Any
    chars: Any


@dataclass(frozen=True)
class StrRange(Node):
    arg: Any
    lo: Any
    hi: Any


@dataclass(frozen=True)
class StrDfa(Node):
    arg: Any
    q: Any
    symbols: Any
    table: Any
    q0: Any
    finals: Any


@dataclass(frozen=True)
class StrNfa(Node):
    arg: Any
    q: Any
    symbols: Any
    table: Any
    q0: Any
    finals: Any


@dataclass(frozen=True)
class StrGcc(Node):
    arg: Any
    chars: Any
    counts: Any


Expr = Union[
    IntLit, BoolLit, StrLit, SetLit, ArrayLit, Array2dLit, RangeLit, Ident, BinOp, Neg,
    Call, Generator, Concat, StrLen, StrRev, StrPow, StrSub, CharAt, Compare, And, InSet,
    StrAlphabet, StrRange, StrDfa, StrNfa, StrGcc,
]

# One entry per row of the string constraint table, keyed by surface form.
TABLE1 = {
    "x = y": Compare,
    "x != y": Compare,
    "x < y": Compare,
    "x <= y": Compare,
    "x >= y": Compare,
    "x > y": Compare,
    "x in S": InSet,
    "str_alphabet(x, S)": StrAlphabet,
    "str_range(x, a, b)": StrRange,
    "z = x ++ y": Concat,
    "a = x[n]": CharAt,
    "y = str_sub(x, n, m)": StrSub,
    "y = str_pow(x, n)": StrPow,
    "y = str_rev(x)": StrRev,
    "n = str_len(x)": StrLen,
    "str_dfa(x, q, S, D, q0, F)": StrDfa,
    "str_nfa(x, q, S, N, q0, F)": StrNfa,
    "str_gcc(x, A, X)": StrGcc,
}

CONSTRAINT_FORMS = (Compare, InSet, StrAlphabet, StrRange, StrDfa, StrNfa, StrGcc)
STRING_FUNCTIONS = (Concat, StrRev, StrPow, StrSub)


def children(e: Any) -> Iterator[Any]:
    """Direct subexpressions of ``e`` in field order."""
    if isinstance(e, (SetLit, ArrayLit)):
        yield from e.items
    elif isinstance(e, Array2dLit):
        for row in e.rows:
            yield from row
    elif isinstance(e, Call):
        yield from e.args
    elif isinstance(e, Node):
        for name in e.__dataclass_fields__:
            if name == "span":
                continue
            v = getattr(e, name)
            if isinstance(v, Node):
                yield v


# -- declarations and items --------------------------------------------------


@dataclass(frozen=True)
class StringVarDecl(Node):
    name: str
    max_len: Any = None
    alphabet: Any = None
    value: Any = None


@dataclass(frozen=True)
class IntVarDecl(Node):
    name: str
    domain: Any = None
    value: Any = None


@dataclass(frozen=True)
class ParDecl(Node):
    name: str
    type: str
    value: Any = None


@dataclass(frozen=True)
class SolveItem(Node):
    kind: str = "satisfy"
    objective: Any = None


Decl = Union[StringVarDecl, IntVarDecl, ParDecl]


@dataclass(frozen=True)
class Model:
    decls: tuple = ()
    constraints: tuple = ()
    solve: Optional[SolveItem] = None
    params: Mapping[str, Any] = field(default_factory=lambda: MappingProxyType({}))
    file: Optional[str] = None

    def decl(self, name: str) -> Optional[Decl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    @property
    def string_vars(self) -> list:
        return [d for d in self.decls if isinstance(d, StringVarDecl)]

    @property
    def int_vars(self) -> list:
        return [d for d in self.decls if isinstance(d, IntVarDecl)]

    @property
    def solve_item(self) -> SolveItem:
        return self.solve if self.solve is not None else SolveItem()

    def with_data(self, bindings: Mapping[str, Any]) -> "Model":
        merged = dict(self.params)
        merged.update(bindings)
        return replace(self, params=MappingProxyType(merged))

    def param_env(self) -> dict:
        """Values of all parameters, from inline definitions and data bindings.

        Raises ``EvalError`` if a parameter cannot be evaluated.
        """
        from .semantics import evaluate

        env: dict = {}
        for d in self.decls:
            if not isinstance(d, ParDecl):
                continue
            if d.name in self.params:
                env[d.name] = self.params[d.name]
            elif d.value is not None:
                env[d.name] = evaluate(d.value, env)
        return env


# -- automata ----------------------------------------------------------------


@dataclass(frozen=True)
class Automaton:
    """Finite automaton over an ordered ASCII symbol list.

    ``table[i-1][j-1]`` is the successor of state ``i`` on ``symbols[j-1]``: a
    state in ``1..q`` for a DFA (0 means no transition), a frozenset of states
    for an NFA.
    """

    q: int
    symbols: tuple
    table: tuple
    q0: int
    finals: frozenset
    deterministic: bool = True

    def problems(self) -> list:
        out = []
        if self.q < 1:
            out.append(f"state count must be positive, got {self.q}")
        for s in self.symbols:
            if not (isinstance(s, str) and len(s) == 1 and is_ascii(s)):
                out.append(f"symbol {s!r} is not a single ASCII character")
        if len(set(self.symbols)) != len(self.symbols):
            out.append("duplicate symbols")
        if not 1 <= self.q0 <= max(self.q, 0):
            out.append(f"initial state {self.q0} outside 1..{self.q}")
        bad = [f for f in self.finals if not 1 <= f <= self.q]
        if bad:
            out.append(f"accepting states {sorted(bad)} outside 1..{self.q}")
        if len(self.table) != self.q or any(len(r) != len(self.symbols) for r in self.table):
            out.append(f"transition table must be {self.q}x{len(self.symbols)}")
            return out
        for row in self.table:
            for entry in row:
                targets = entry if not self.deterministic else (entry,)
                if self.deterministic and not isinstance(entry, int):
                    out.append(f"DFA entry {entry!r} is not a state")
                    continue
                if not self.deterministic and not isinstance(entry, frozenset):
                    out.append(f"NFA entry {entry!r} is not a set of states")
                    continue
                for t in targets:
                    if not (0 if self.deterministic else 1) <= t <= self.q:
                        out.append(f"transition target {t} outside 1..{self.q}")
        return out

    def accepts(self, word: str) -> bool:
        col = {c: j for j, c in enumerate(self.symbols)}
        if self.deterministic:
            st = self.q0
            for ch in word:
                if ch not in col:
                    return False
                st = self.table[st - 1][col[ch]]
                if st == 0:
                    return False
            return st in self.finals
        cur = {self.q0}
        for ch in word:
            if ch not in col:
                return False
            cur = {t for s in cur for t in self.table[s - 1][col[ch]]}
            if not cur:
                return False
        return bool(cur & self.finals)


class StateCapExceeded(RuntimeError):
    pass


DEFAULT_STATE_CAP = 4096


def determinize(aut: Automaton, cap: int = DEFAULT_STATE_CAP) -> Automaton:
    """Subset construction.  Unreachable subsets are never created and the
    empty subset becomes the missing transition 0."""
    if aut.deterministic:
        return aut
    start = frozenset({aut.q0})
    index = {start: 1}
    order = [start]
    rows = []
    k = 0
    while k < len(order):
        cur = order[k]
        k += 1
        row = []
        for j in range(len(aut.symbols)):
            nxt = frozenset(t for s in cur for t in aut.table[s - 1][j])
            if not nxt:
                row.append(0)
                continue
            if nxt not in index:
                if len(order) >= cap:
                    raise StateCapExceeded(
                        f"subset construction exceeded {cap} states; use a smaller NFA"
                    )
                index[nxt] = len(order) + 1
                order.append(nxt)
            row.append(index[nxt])
        rows.append(tuple(row))
    finals = frozenset(i + 1 for i, sub in enumerate(order) if sub & aut.finals)
    return Automaton(len(order), aut.symbols, tuple(rows), 1, finals, True)


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    span: Optional[Span] = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.kind}: {self.message}"


INT_CALLS = {"min": 2, "max": 2, "abs": 1, "bool2int": 1}


def validate(m: Model) -> list:
    """Return one Diagnostic per problem found in ``m``; empty means valid."""
    return _Validator(m).run()


class _Validator:
    def __init__(self, m: Model):
        self.m = m
        self.diags: list = []
        self.names: dict = {}
        self.env: dict = {}
        self.unbound: set = set()

    def err(self, kind: str, msg: str, node: Any) -> None:
        self.diags.append(Diagnostic(kind, msg, getattr(node, "span", None)))

    def run(self) -> list:
        from .semantics import EvalError, evaluate

        m = self.m
        if not m.decls and not m.constraints:
            self.err("empty-model", "model has no declarations or constraints", m.solve)
        for d in m.decls:
            if d.name in self.names:
                self.err("duplicate", f"'{d.name}' declared twice", d)
                continue
            self.names[d.name] = d
        declared_pars = {d.name for d in m.decls if isinstance(d, ParDecl)}
        for name in m.params:
            if name not in declared_pars:
                self.diags.append(Diagnostic("unknown-parameter", f"data binds undeclared '{name}'"))

        for d in m.decls:
            if not isinstance(d, ParDecl):
                continue
            if d.name in m.params:
                if d.value is not None:
                    self.err("duplicate", f"parameter '{d.name}' bound twice", d)
                self.env[d.name] = m.params[d.name]
            elif d.value is None:
                self.err("unbound-parameter", f"parameter '{d.name}' has no value", d)
                self.unbound.add(d.name)
            elif self.check_expr(d.value, set(), par=True):
                try:
                    self.env[d.name] = evaluate(d.value, self.env)
                except EvalError as exc:
                    self.err("evaluation", f"parameter '{d.name}': {exc}", d)
                    self.unbound.add(d.name)

        for d in m.decls:
            if isinstance(d, StringVarDecl):
                self.check_string_decl(d)
            elif isinstance(d, IntVarDecl):
                self.check_int_decl(d)

        for c in m.constraints:
            if self.check_expr(c, set()):
                if self.kind(c, {}) != "bool":
                    self.err("type", "constraint is not a Boolean expression", c)
                else:
                    self.check_constraint(c, {})
        if m.solve is not None and m.solve.objective is not None:
            if self.check_expr(m.solve.objective, set()):
                if self.kind(m.solve.objective, {}) != "int":
                    self.err("type", "objective must be integer valued", m.solve)
        return self.diags

    # name resolution; returns False if anything failed to resolve
    def check_expr(self, e: Any, scope: set, par: bool = False) -> bool:
        ok = True
        if isinstance(e, Ident):
            if e.name in scope:
                return True
            d = self.names.get(e.name)
            if d is None:
                self.err("unresolved-name", f"'{e.name}' is not declared", e)
                return False
            if par and not isinstance(d, ParDecl):
                self.err("type", f"'{e.name}' is a variable where a parameter is required", e)
                return False
            return e.name not in self.unbound
        if isinstance(e, Generator):
            ok = self.check_expr(e.lo, scope, True) and ok
            ok = self.check_expr(e.hi, scope, True) and ok
            return self.check_expr(e.body, scope | {e.var}, par) and ok
        if isinstance(e, Call) and e.name not in INT_CALLS:
            self.err("unknown-function", f"unknown function '{e.name}'", e)
            ok = False
        elif isinstance(e, Call) and len(e.args) != INT_CALLS[e.name]:
            self.err("arity", f"'{e.name}' expects {INT_CALLS[e.name]} argument(s)", e)
            ok = False
        for ch in children(e):
            ok = self.check_expr(ch, scope, par) and ok
        return ok

    def const(self, e: Any, what: str, scope_env: Optional[dict] = None) -> Any:
        from .semantics import EvalError, evaluate

        env = dict(self.env)
        if scope_env:
            env.update(scope_env)
        try:
            return evaluate(e, env)
        except EvalError as exc:
            self.err("evaluation", f"{what}: {exc}", e)
            return None

    def check_string_decl(self, d: StringVarDecl) -> None:
        if d.max_len is not None and self.check_expr(d.max_len, set(), par=True):
            n = self.const(d.max_len, f"bound of '{d.name}'")
            if n is not None and (not isinstance(n, int) or n < 0):
                self.err("bound", f"bound of '{d.name}' must be a non-negative integer", d)
        if d.alphabet is not None and self.check_expr(d.alphabet, set(), par=True):
            chars = self.const(d.alphabet, f"alphabet of '{d.name}'")
            if chars is not None:
                self.check_charset(chars, d, f"alphabet of '{d.name}'", nonempty=True)
        if d.value is not None and self.check_expr(d.value, set()):
            if self.kind(d.value, {}) != "string":
                self.err("type", f"'{d.name}' assigned a non-string value", d)

    def check_int_decl(self, d: IntVarDecl) -> None:
        if d.domain is not None and self.check_expr(d.domain, set(), par=True):
            dom = self.const(d.domain, f"domain of '{d.name}'")
            if dom is not None:
                if not isinstance(dom, frozenset) or not all(isinstance(v, int) for v in dom):
                    self.err("type", f"domain of '{d.name}' is not a set of integers", d)
                elif not dom:
                    self.err("domain", f"domain of '{d.name}' is empty", d)
        if d.value is not None and self.check_expr(d.value, set()):
            if self.kind(d.value, {}) != "int":
                self.err("type", f"'{d.name}' assigned a non-integer value", d)

    def check_charset(self, chars: Any, node: Any, what: str, nonempty: bool = False) -> bool:
        if not isinstance(chars, frozenset) or not all(
            isinstance(c, str) and len(c) == 1 for c in chars
        ):
            self.err("type", f"{what} must be a set of single characters", node)
            return False
        if not all(is_ascii(c) for c in chars):
            self.err("alphabet", f"{what} contains non-ASCII characters", node)
            return False
        if nonempty and not chars:
            self.err("alphabet", f"{what} is empty", node)
            return False
        return True

    # kind inference: 'int', 'string', 'bool', 'set', 'array', or None on error
    def kind(self, e: Any, scope: dict) -> Optional[str]:
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, StrLit):
            return "string"
        if isinstance(e, (SetLit, RangeLit)):
            return "set"
        if isinstance(e, (ArrayLit, Array2dLit)):
            return "array"
        if isinstance(e, Ident):
            if e.name in scope:
                return "int"
            d = self.names.get(e.name)
            if isinstance(d, StringVarDecl):
                return "string"
            if isinstance(d, IntVarDecl):
                return "int"
            v = self.env.get(e.name)
            if isinstance(v, bool):
                return "bool"
            if isinstance(v, int):
                return "int"
            if isinstance(v, str):
                return "string"
            if isinstance(v, frozenset):
                return "set"
            if isinstance(v, tuple):
                return "array"
            return None
        if isinstance(e, (BinOp, Neg)):
            for ch in children(e):
                self.expect(ch, "int", scope)
            return "int"
        if isinstance(e, Call):
            if e.name == "bool2int":
                self.expect(e.args[0], "bool", scope)
            else:
                for a in e.args:
                    self.expect(a, "int", scope)
            return "int"
        if isinstance(e, Generator):
            inner = dict(scope)
            inner[e.var] = True
            if e.kind == "sum":
                self.expect(e.body, "int", inner)
                return "int"
            self.expect(e.body, "bool", inner)
            return "bool"
        if isinstance(e, Concat):
            self.expect(e.lhs, "string", scope)
            self.expect(e.rhs, "string", scope)
            return "string"
        if isinstance(e, StrLen):
            self.expect(e.arg, "string", scope)
            return "int"
        if isinstance(e, StrRev):
            self.expect(e.arg, "string", scope)
            return "string"
        if isinstance(e, StrPow):
            self.expect(e.arg, "string", scope)
            self.expect(e.exp, "int", scope)
            return "string"
        if isinstance(e, StrSub):
            self.expect(e.arg, "string", scope)
            self.expect(e.lo, "int", scope)
            self.expect(e.hi, "int", scope)
            return "string"
        if isinstance(e, CharAt):
            self.expect(e.arg, "string", scope)
            self.expect(e.index, "int", scope)
            return "int"
        if isinstance(e, Compare):
            lk, rk = self.kind(e.lhs, scope), self.kind(e.rhs, scope)
            if lk is None or rk is None:
                return "bool"
            if {lk, rk} == {"int", "string"}:
                lit = e.lhs if rk == "int" else e.rhs
                if not (isinstance(lit, StrLit) and len(lit.text) == 1):
                    self.err("type", "cannot compare a string with an integer", e)
            elif lk != rk or lk not in ("int", "string"):
                self.err("type", f"cannot compare {lk} with {rk}", e)
            return "bool"
        if isinstance(e, And):
            self.expect(e.lhs, "bool", scope)
            self.expect(e.rhs, "bool", scope)
            return "bool"
        if isinstance(e, (InSet, StrAlphabet, StrRange, StrDfa, StrNfa, StrGcc)):
            self.expect(e.arg, "string", scope)
            return "bool"
        return None

    def expect(self, e: Any, want: str, scope: dict) -> None:
        k = self.kind(e, scope)
        if k is not None and k != want:
            self.err("type", f"expected {want}, found {k}", e)

    def check_constraint(self, c: Any, scope_env: dict) -> None:
        """Semantic checks that need parameter values (automata, gcc, pow)."""
        if isinstance(c, And):
            self.check_constraint(c.lhs, scope_env)
            self.check_constraint(c.rhs, scope_env)
            return
        if isinstance(c, Generator):
            lo = self.const(c.lo, "generator bound", scope_env)
            hi = self.const(c.hi, "generator bound", scope_env)
            if isinstance(lo, int) and isinstance(hi, int):
                for i in range(lo, hi + 1):
                    self.check_constraint(c.body, {**scope_env, c.var: i})
            return
        if isinstance(c, (InSet, StrAlphabet)):
            chars = self.const(c.chars, "character set", scope_env)
            if chars is not None:
                self.check_charset(chars, c, "character set")
        elif isinstance(c, StrRange):
            for b in (c.lo, c.hi):
                v = self.const(b, "range bound", scope_env)
                if v is not None and not (isinstance(v, str) and len(v) == 1 and is_ascii(v)):
                    self.err("type", "range bounds must be single ASCII characters", c)
        elif isinstance(c, (StrDfa, StrNfa)):
            aut = self.automaton(c, scope_env)
            if aut is not None:
                for p in aut.problems():
                    self.err("automaton", p, c)
        elif isinstance(c, StrGcc):
            chars = self.const(c.chars, "gcc characters", scope_env)
            if chars is not None:
                if not isinstance(chars, tuple) or not all(
                    isinstance(ch, str) and len(ch) == 1 and is_ascii(ch) for ch in chars
                ):
                    self.err("type", "gcc characters must be an array of ASCII characters", c)
                elif len(set(chars)) != len(chars):
                    self.err("gcc", "gcc characters must be distinct", c)
                elif not isinstance(c.counts, ArrayLit) and not isinstance(c.counts, Ident):
                    self.err("type", "gcc counts must be an array", c)
                else:
                    n = self.array_len(c.counts, scope_env)
                    if n is not None and n != len(chars):
                        self.err("gcc", "gcc characters and counts differ in length", c)
        for sub in _walk(c):
            if isinstance(sub, StrPow):
                self.check_pow(sub, scope_env)

    def array_len(self, e: Any, scope_env: dict) -> Optional[int]:
        if isinstance(e, ArrayLit):
            return len(e.items)
        v = self.const(e, "array", scope_env)
        return len(v) if isinstance(v, tuple) else None

    def check_pow(self, p: StrPow, scope_env: dict) -> None:
        from .semantics import int_bounds

        lo, hi = int_bounds(p.exp, self.m, {**self.env, **scope_env})
        if hi is None:
            self.err("bound", "str_pow exponent needs a finite upper bound", p)
        elif hi < 0:
            self.err("bound", "str_pow exponent is always negative", p)

    def automaton(self, c: Any, scope_env: dict) -> Optional[Automaton]:
        vals = [
            self.const(x, "automaton argument", scope_env)
            for x in (c.q, c.symbols, c.table, c.q0, c.finals)
        ]
        if any(v is None for v in vals):
            return None
        try:
            return to_automaton(*vals, deterministic=isinstance(c, StrDfa))
        except (TypeError, ValueError) as exc:
            self.err("automaton", str(exc), c)
            return None


def _walk(e: Any) -> Iterator[Any]:
    yield e
    for ch in children(e):
        yield from _walk(ch)


def walk(e: Any) -> Iterator[Any]:
    """Pre-order traversal of ``e`` and all its subexpressions."""
    return _walk(e)


def substitute(e: Any, name: str, value: Any) -> Any:
    """Replace free occurrences of identifier ``name`` in ``e`` by ``value``."""
    if isinstance(e, Ident):
        return value if e.name == name else e
    if not isinstance(e, Node):
        return e
    if isinstance(e, Generator):
        lo, hi = substitute(e.lo, name, value), substitute(e.hi, name, value)
        body = e.body if e.var == name else substitute(e.body, name, value)
        return replace(e, lo=lo, hi=hi, body=body)
    if isinstance(e, (SetLit, ArrayLit, Call)):
        field_name = "args" if isinstance(e, Call) else "items"
        items = tuple(substitute(x, name, value) for x in getattr(e, field_name))
        return replace(e, **{field_name: items})
    if isinstance(e, Array2dLit):
        return replace(e, rows=tuple(tuple(substitute(x, name, value) for x in r) for r in e.rows))
    changes = {}
    for f in e.__dataclass_fields__:
        if f == "span":
            continue
        v = getattr(e, f)
        if isinstance(v, Node):
            changes[f] = substitute(v, name, value)
    return replace(e, **changes) if changes else e


def to_automaton(q: Any, symbols: Any, table: Any, q0: Any, finals: Any,
                 deterministic: bool = True) -> Automaton:
    """Build an Automaton from evaluated parameter values.

    ``symbols`` may be a set (ordered by character code) or an array.  ``table``
    may be 2-d (tuple of rows) or flattened row-major.
    """
    if not isinstance(q, int) or not isinstance(q0, int):
        raise TypeError("state count and initial state must be integers")
    if isinstance(symbols, frozenset):
        syms = tuple(sorted(symbols))
    elif isinstance(symbols, tuple):
        syms = symbols
    else:
        raise TypeError("symbols must be a set or an array of characters")
    if not isinstance(finals, frozenset):
        raise TypeError("accepting states must be a set")
    if not isinstance(table, tuple):
        raise TypeError("transition table must be an array")
    if table and not isinstance(table[0], tuple):
        width = len(syms)
        if width == 0 or len(table) != q * width:
            raise ValueError(f"flat transition table must have {q}x{width} entries")
        table = tuple(table[i * width:(i + 1) * width] for i in range(q))
    if deterministic:
        rows = tuple(tuple(row) for row in table)
    else:
        rows = tuple(
            tuple(frozenset(x) if isinstance(x, frozenset) else frozenset({x}) for x in row)
            for row in table
        )
    return Automaton(q, syms, rows, q0, frozenset(finals), deterministic)

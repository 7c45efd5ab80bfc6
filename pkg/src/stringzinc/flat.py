"""Flat instances: data types, FlatZinc-style text emission, and a reader.

Arguments of flat constraints are plain Python values:

* ``int`` -- an integer literal
* ``str`` -- the name of a declared variable
* ``StrVal`` -- a string literal (string-preserving target only)
* ``tuple`` -- an array literal
* ``frozenset`` -- a set literal

The reader parses the emitted text back, which is what the independent
solution verifier works from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .semantics import int_div, int_mod


@dataclass(frozen=True)
class StrVal:
    text: str


@dataclass(frozen=True)
class FlatConstraint:
    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}({', '.join(format_arg(a) for a in self.args)})"


def _quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def format_set(values: Iterable[Any]) -> str:
    vals = sorted(values)
    if vals and all(isinstance(v, int) for v in vals) and vals == list(range(vals[0], vals[-1] + 1)) \
            and len(vals) > 2:
        return f"{vals[0]}..{vals[-1]}"
    return "{" + ",".join(_quote(v) if isinstance(v, str) else str(v) for v in vals) + "}"


def format_arg(a: Any) -> str:
    if isinstance(a, bool):
        return "true" if a else "false"
    if isinstance(a, int):
        return str(a)
    if isinstance(a, str):
        return a
    if isinstance(a, StrVal):
        return _quote(a.text)
    if isinstance(a, tuple):
        return "[" + ",".join(format_arg(x) for x in a) + "]"
    if isinstance(a, frozenset):
        return format_set(a)
    raise TypeError(f"cannot format argument {a!r}")


def format_domain(lo: int, hi: int, values: Optional[frozenset]) -> str:
    if values is None:
        return f"{lo}..{hi}"
    vals = sorted(values)
    if vals == list(range(vals[0], vals[-1] + 1)):
        return f"{vals[0]}..{vals[-1]}"
    return "{" + ",".join(map(str, vals)) + "}"


@dataclass
class IntVar:
    name: str
    lo: int
    hi: int
    values: Optional[frozenset] = None
    role: str = "aux"

    def domain_values(self) -> frozenset:
        if self.values is not None:
            return self.values
        return frozenset(range(self.lo, self.hi + 1))


@dataclass
class OutputString:
    name: str
    chars: tuple
    length: Any


class FlatError(Exception):
    pass


ROLES = ("length", "char", "int", "aux", "bool", "symbol")


@dataclass
class IntFlatInstance:
    """Pure integer instance: scalar variables, constraints, solve item."""

    vars: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    solve: tuple = ("satisfy", None)
    strings: list = field(default_factory=list)
    ints: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add_var(self, name: str, lo: int, hi: int, values: Optional[frozenset] = None,
                role: str = "aux") -> str:
        if name in self.vars:
            raise FlatError(f"variable {name} declared twice")
        if values is not None:
            values = frozenset(values)
            if not values:
                raise FlatError(f"variable {name} has an empty domain")
            lo, hi = min(values), max(values)
            if len(values) == hi - lo + 1:
                values = None
        if lo > hi:
            raise FlatError(f"variable {name} has an empty domain {lo}..{hi}")
        self.vars[name] = IntVar(name, lo, hi, values, role)
        return name

    def emit(self) -> str:
        lines = []
        outs = {s.length for s in self.strings if isinstance(s.length, str)}
        for v in self.vars.values():
            ann = ""
            if v.name in self.ints:
                ann = " :: output_var"
            elif v.name in outs:
                ann = " :: output_length"
            lines.append(f"var {format_domain(v.lo, v.hi, v.values)}: {v.name}{ann};")
        for s in self.strings:
            lines.append(
                f"array [1..{len(s.chars)}] of var int: {s.name} :: "
                f"output_string({format_arg(s.length)}) = {format_arg(tuple(s.chars))};"
            )
        for c in self.constraints:
            lines.append(f"constraint {c};")
        lines.append(_solve_line(self.solve))
        return "\n".join(lines) + "\n"

    def stats(self) -> dict:
        return {"variables": len(self.vars), "constraints": len(self.constraints)}


def _solve_line(solve: tuple) -> str:
    kind, obj = solve
    if kind == "satisfy":
        return "solve satisfy;"
    return f"solve {kind} {format_arg(obj)};"


@dataclass
class StrDecl:
    name: str
    kind: str  # "string" or "int"
    bound: Optional[int] = None
    alphabet: Optional[frozenset] = None
    lo: Optional[int] = None
    hi: Optional[int] = None
    values: Optional[frozenset] = None
    aux: bool = False

    def line(self) -> str:
        if self.kind == "string":
            ty = "string" if self.bound is None else f"string({self.bound})"
            if self.alphabet is not None:
                ty += " of " + format_set(self.alphabet)
        elif self.values is not None:
            ty = format_set(self.values)
        elif self.lo is not None and self.hi is not None:
            ty = f"{self.lo}..{self.hi}"
        else:
            ty = "int"
        return f"var {ty}: {self.name};"


@dataclass
class StrFlatInstance:
    """Instance that keeps string variables and ``str_*`` predicates."""

    decls: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    solve: tuple = ("satisfy", None)

    def emit(self) -> str:
        lines = [d.line() for d in self.decls]
        lines += [f"constraint {c};" for c in self.constraints]
        lines.append(_solve_line(self.solve))
        return "\n".join(lines) + "\n"


# -- reader -------------------------------------------------------------------

_FZN_TOKEN = re.compile(
    r"""\s+|%[^\n]*|(?P<tok>"(?:[^"\\]|\\.)*"|-?[0-9]+|[A-Za-z_][A-Za-z0-9_]*|\.\.|::|[\[\](){},:;=])|(?P<bad>.)""",
    re.VERBOSE | re.DOTALL,
)


def _fzn_tokens(text: str) -> list:
    out = []
    for tok, bad in _FZN_TOKEN.findall(text):
        if bad:
            raise FlatError(f"unexpected character {bad!r} in flat instance")
        if tok:
            out.append(tok)
    return out


@dataclass
class ParsedFlat:
    vars: dict = field(default_factory=dict)  # name -> frozenset of values, or None
    arrays: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)  # array name -> length arg
    output_vars: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    solve: tuple = ("satisfy", None)


_PUNCT = frozenset("[]{}(),:;=") | {"..", "::"}


class _FznReader:
    def __init__(self, toks: list):
        self.t = toks
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.t[self.i] if self.i < len(self.t) else None

    def take(self, want: Optional[str] = None) -> str:
        if self.i >= len(self.t):
            raise FlatError("unexpected end of flat instance")
        tok = self.t[self.i]
        if want is not None and tok != want:
            raise FlatError(f"expected {want!r}, found {tok!r}")
        self.i += 1
        return tok

    def value(self) -> Any:
        tok = self.take()
        if tok == "[":
            items = []
            t, i = self.t, self.i
            # fast path for flat arrays of names and integers
            while i + 1 < len(t):
                x, nxt = t[i], t[i + 1]
                if x in _PUNCT or x[0] == '"' or x in ("true", "false") or nxt not in (",", "]"):
                    break
                items.append(int(x) if x[0].isdigit() or x[0] == "-" else x)
                if nxt == "]":
                    i += 1
                    break
                i += 2
            self.i = i
            while self.peek() != "]":
                items.append(self.value())
                if self.peek() == ",":
                    self.take()
            self.take("]")
            return tuple(items)
        if tok == "{":
            items = []
            while self.peek() != "}":
                items.append(self.value())
                if self.peek() == ",":
                    self.take()
            self.take("}")
            return frozenset(items)
        if tok.startswith('"'):
            return StrVal(bytes(tok[1:-1], "ascii").decode("unicode_escape"))
        if tok in ("true", "false"):
            return tok == "true"
        if tok[0].isdigit() or (tok[0] == "-" and len(tok) > 1):
            v = int(tok)
            if self.peek() == "..":
                self.take()
                hi = int(self.take())
                return frozenset(range(v, hi + 1))
            return v
        return tok

    def annotations(self) -> list:
        anns = []
        while self.peek() == "::":
            self.take()
            name = self.take()
            args = []
            if self.peek() == "(":
                self.take()
                while self.peek() != ")":
                    args.append(self.value())
                    if self.peek() == ",":
                        self.take()
                self.take(")")
            anns.append((name, args))
        return anns

    def domain(self) -> Optional[frozenset]:
        tok = self.peek()
        if tok in ("int", "string", "bool"):
            self.take()
            if tok == "string" and self.peek() == "(":
                self.take()
                self.value()
                self.take(")")
            if tok == "string" and self.peek() == "of":
                self.take()
                self.value()
            return frozenset({0, 1}) if tok == "bool" else None
        v = self.value()
        if not isinstance(v, frozenset):
            raise FlatError(f"bad domain {v!r}")
        return v

    def read(self) -> ParsedFlat:
        out = ParsedFlat()
        while self.peek() is not None:
            tok = self.take()
            if tok == "var":
                dom = self.domain()
                self.take(":")
                name = self.take()
                anns = self.annotations()
                if any(a[0] == "output_var" for a in anns):
                    out.output_vars.append(name)
                out.vars[name] = dom
            elif tok == "array":
                self.take("[")
                self.value()
                self.take("]")
                self.take("of")
                self.take("var")
                self.domain()
                self.take(":")
                name = self.take()
                for ann, args in self.annotations():
                    if ann == "output_string":
                        out.outputs[name] = args[0]
                self.take("=")
                out.arrays[name] = self.value()
            elif tok == "constraint":
                name = self.take()
                self.take("(")
                args = []
                while self.peek() != ")":
                    args.append(self.value())
                    if self.peek() == ",":
                        self.take()
                self.take(")")
                self.annotations()
                out.constraints.append(FlatConstraint(name, tuple(args)))
            elif tok == "solve":
                self.annotations()
                kind = self.take()
                out.solve = (kind, None if kind == "satisfy" else self.value())
            else:
                raise FlatError(f"unexpected {tok!r} in flat instance")
            self.take(";")
        return out


def parse_flat(text: str) -> ParsedFlat:
    return _FznReader(_fzn_tokens(text)).read()


# -- verifier -------------------------------------------------------------------


def _val(a: Any, asg: dict, arrays: dict) -> Any:
    if isinstance(a, str):
        if a in arrays:
            return tuple(_val(x, asg, arrays) for x in arrays[a])
        return asg[a]
    if isinstance(a, tuple):
        return tuple(_val(x, asg, arrays) for x in a)
    return a


def _lex_le(x: tuple, y: tuple) -> bool:
    return list(x) <= list(y)


def _regular(xs: tuple, q: int, s: int, d: tuple, q0: int, finals: frozenset) -> bool:
    st = q0
    for x in xs:
        if not 1 <= x <= s or not 1 <= st <= q:
            return False
        st = d[(st - 1) * s + (x - 1)]
        if st == 0:
            return False
    return st in finals


def check_constraint(c: FlatConstraint, asg: dict, arrays: Optional[dict] = None) -> bool:
    """Evaluate one integer flat constraint under a complete assignment."""
    a = [_val(x, asg, arrays or {}) for x in c.args]
    n = c.name
    if n == "int_lin_eq":
        return sum(k * v for k, v in zip(a[0], a[1])) == a[2]
    if n == "int_lin_le":
        return sum(k * v for k, v in zip(a[0], a[1])) <= a[2]
    if n == "int_lin_ne":
        return sum(k * v for k, v in zip(a[0], a[1])) != a[2]
    if n == "int_eq":
        return a[0] == a[1]
    if n == "int_ne":
        return a[0] != a[1]
    if n == "int_le":
        return a[0] <= a[1]
    if n == "int_lt":
        return a[0] < a[1]
    if n == "int_eq_reif":
        return (a[0] == a[1]) == bool(a[2]) and a[2] in (0, 1)
    if n == "int_ne_reif":
        return (a[0] != a[1]) == bool(a[2]) and a[2] in (0, 1)
    if n == "int_le_reif":
        return (a[0] <= a[1]) == bool(a[2]) and a[2] in (0, 1)
    if n == "bool_clause":
        if any(v not in (0, 1) for v in a[0] + a[1]):
            return False
        return any(v == 1 for v in a[0]) or any(v == 0 for v in a[1])
    if n == "set_in":
        return a[0] in a[1]
    if n in ("array_var_int_element", "array_int_element"):
        return 1 <= a[0] <= len(a[1]) and a[1][a[0] - 1] == a[2]
    if n == "int_times":
        return a[0] * a[1] == a[2]
    if n == "int_div":
        return a[1] != 0 and int_div(a[0], a[1]) == a[2]
    if n == "int_mod":
        return a[1] != 0 and int_mod(a[0], a[1]) == a[2]
    if n == "int_min":
        return min(a[0], a[1]) == a[2]
    if n == "int_max":
        return max(a[0], a[1]) == a[2]
    if n == "int_abs":
        return abs(a[0]) == a[1]
    if n == "lex_lesseq":
        return len(a[0]) == len(a[1]) and _lex_le(a[0], a[1])
    if n == "regular":
        return _regular(*a)
    if n == "global_cardinality":
        return all(list(a[0]).count(v) == k for v, k in zip(a[1], a[2]))
    raise FlatError(f"unknown constraint {n}")


def verify(text: str, asg: dict) -> list:
    """Constraints (and domains) of the instance text violated by ``asg``."""
    p = parse_flat(text)
    bad = []
    for name, dom in p.vars.items():
        if name not in asg:
            bad.append(f"{name} unassigned")
        elif dom is not None and asg[name] not in dom:
            bad.append(f"{name} = {asg[name]} outside its domain")
    if bad:
        return bad
    for c in p.constraints:
        if not check_constraint(c, asg, p.arrays):
            bad.append(str(c))
    return bad


def decode_string(chars: tuple, length: Any, asg: dict) -> str:
    from .model import char_of

    n = asg[length] if isinstance(length, str) else length
    vals = [asg[c] if isinstance(c, str) else c for c in chars]
    return "".join(char_of(v) for v in vals[:n])

"""Recursive-descent parser for ``.szn`` models and ``.dzn`` data files.

The surface syntax is a subset of MiniZinc 2 extended with string variables
and the ``str_*`` builtins.  Syntax errors are collected per item: after an
error the parser skips to the next ``;`` and continues, so one call reports
every malformed item.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .model import (
    And, Array2dLit, ArrayLit, BinOp, BoolLit, Call, CharAt, Compare, Concat, Diagnostic,
    Generator, Ident, InSet, IntLit, IntVarDecl, Model, Neg, ParDecl, RangeLit, SetLit,
    SolveItem, Span, StrAlphabet, StrDfa, StrGcc, StrLen, StrLit, StrNfa, StrPow, StrRange,
    StrRev, StrSub, StringVarDecl, is_ascii,
)


class ParseError(Exception):
    def __init__(self, diagnostics: list):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


KEYWORDS = {
    "var", "par", "int", "bool", "string", "of", "set", "array", "constraint", "solve",
    "satisfy", "minimize", "maximize", "div", "mod", "in", "include", "output", "true",
    "false",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\[\||\|\]|\.\.|\+\+|/\\|\\/|!=|==|<=|>=|[-+*<>=|()\[\]{},:;])
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: Any
    span: Span


def tokenize(text: str, file: Optional[str] = None) -> list:
    toks = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        span = Span(line, col, file)
        if m is None:
            raise ParseError([Diagnostic("syntax", f"unexpected character {text[pos]!r}", span)])
        kind = m.lastgroup
        tok = m.group()
        if kind == "string":
            toks.append(Token("string", tok, _unescape(tok, span), span))
        elif kind == "int":
            toks.append(Token("num", tok, int(tok), span))
        elif kind == "ident":
            if tok in KEYWORDS:
                toks.append(Token(tok, tok, None, span))
            else:
                toks.append(Token("ident", tok, tok, span))
        elif kind == "op":
            toks.append(Token(tok, tok, None, span))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    toks.append(Token("eof", "", None, Span(line, col, file)))
    return toks


def _unescape(tok: str, span: Span) -> str:
    out = []
    i = 1
    while i < len(tok) - 1:
        c = tok[i]
        if c == "\\":
            nxt = tok[i + 1]
            if nxt not in _ESCAPES:
                raise ParseError([Diagnostic("syntax", f"unknown escape \\{nxt}", span)])
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    s = "".join(out)
    if not is_ascii(s):
        raise ParseError([Diagnostic("syntax", "string literal contains non-ASCII characters", span)])
    return s


class _Syntax(Exception):
    def __init__(self, msg: str, span: Span):
        self.diag = Diagnostic("syntax", msg, span)


# builtin name -> (arity, constructor)
_STRING_BUILTINS: dict = {
    "str_len": (1, lambda a, s: StrLen(*a, span=s)),
    "str_rev": (1, lambda a, s: StrRev(*a, span=s)),
    "str_pow": (2, lambda a, s: StrPow(*a, span=s)),
    "str_sub": (3, lambda a, s: StrSub(*a, span=s)),
    "str_concat": (2, lambda a, s: Concat(*a, span=s)),
    "str_char_at": (2, lambda a, s: CharAt(*a, span=s)),
    "str_alphabet": (2, lambda a, s: StrAlphabet(*a, span=s)),
    "str_range": (3, lambda a, s: StrRange(*a, span=s)),
    "str_dfa": (6, lambda a, s: StrDfa(*a, span=s)),
    "str_nfa": (6, lambda a, s: StrNfa(*a, span=s)),
    "str_gcc": (3, lambda a, s: StrGcc(*a, span=s)),
}

_CMP = {"=": "=", "==": "=", "!=": "!=", "<": "<", "<=": "<=", ">=": ">=", ">": ">"}


class _Parser:
    def __init__(self, toks: list):
        self.toks = toks
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    def take(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise _Syntax(f"expected {what or repr(kind)}, found {found!r}", self.tok.span)
        return self.take()

    def ident(self) -> Token:
        t = self.expect("ident", "identifier")
        if t.value.startswith("_"):
            raise _Syntax(f"identifiers may not start with '_': {t.value}", t.span)
        return t

    def recover(self) -> None:
        depth = 0
        while not self.at("eof"):
            t = self.take()
            if t.kind in ("(", "[", "{", "[|"):
                depth += 1
            elif t.kind in (")", "]", "}", "|]"):
                depth = max(0, depth - 1)
            elif t.kind == ";" and depth == 0:
                return

    # -- items ---------------------------------------------------------------

    def items(self, item: Callable[[], None]) -> list:
        diags = []
        while not self.at("eof"):
            start = self.i
            try:
                item()
                self.expect(";", "';'")
            except _Syntax as exc:
                diags.append(exc.diag)
                # rescan from the item start so brackets balance while skipping
                self.i = start
                self.recover()
        return diags

    def model_item(self, acc: dict) -> None:
        t = self.tok
        if t.kind == "include":
            self.take()
            self.expect("string", "file name")
        elif t.kind == "output":
            self.take()
            self.skip_expr()
        elif t.kind == "constraint":
            self.take()
            acc["constraints"].append(self.expr())
        elif t.kind == "solve":
            self.take()
            if acc["solve"] is not None:
                raise _Syntax("more than one solve item", t.span)
            if self.at("satisfy"):
                self.take()
                acc["solve"] = SolveItem("satisfy", span=t.span)
            elif self.at("minimize", "maximize"):
                kind = self.take().kind
                acc["solve"] = SolveItem(kind, self.expr(), span=t.span)
            else:
                raise _Syntax("expected satisfy, minimize or maximize", self.tok.span)
        elif t.kind == "var":
            acc["decls"].append(self.var_decl())
        elif t.kind in ("par", "int", "bool", "string", "set", "array"):
            acc["decls"].append(self.par_decl())
        elif t.kind == "ident" and self.peek().kind == "=":
            name = self.ident()
            self.take()
            if name.value in acc["assign"]:
                raise _Syntax(f"duplicate assignment to '{name.value}'", name.span)
            acc["assign"][name.value] = self.expr()
        else:
            raise _Syntax(f"unexpected {t.text or 'end of input'!r} at start of item", t.span)

    def skip_expr(self) -> None:
        depth = 0
        while not self.at("eof"):
            if self.at(";") and depth == 0:
                return
            t = self.take()
            if t.kind in ("(", "[", "{", "[|"):
                depth += 1
            elif t.kind in (")", "]", "}", "|]"):
                depth -= 1

    def var_decl(self) -> Any:
        start = self.expect("var").span
        if self.at("string"):
            self.take()
            bound = alpha = None
            if self.at("("):
                self.take()
                bound = self.expr()
                self.expect(")", "')'")
            if self.at("of"):
                self.take()
                alpha = self.range_expr()
            self.expect(":", "':'")
            name = self.ident()
            value = self.opt_value()
            return StringVarDecl(name.value, bound, alpha, value, span=start)
        if self.at("int"):
            self.take()
            domain = None
        elif self.at("bool"):
            self.take()
            domain = RangeLit(IntLit(0), IntLit(1), span=start)
        else:
            domain = self.range_expr()
            if not isinstance(domain, (RangeLit, SetLit, Ident)):
                raise _Syntax("expected a variable type", start)
        self.expect(":", "':'")
        name = self.ident()
        value = self.opt_value()
        return IntVarDecl(name.value, domain, value, span=start)

    def opt_value(self) -> Any:
        if self.at("="):
            self.take()
            return self.expr()
        return None

    def par_decl(self) -> ParDecl:
        start = self.tok.span
        if self.at("par"):
            self.take()
        ty = self.par_type()
        self.expect(":", "':'")
        name = self.ident()
        return ParDecl(name.value, ty, self.opt_value(), span=start)

    def par_type(self) -> str:
        if self.at("int", "bool", "string"):
            return self.take().kind
        if self.at("set"):
            self.take()
            self.expect("of", "'of'")
            return "set of " + self.par_type()
        if self.at("array"):
            self.take()
            self.expect("[", "'['")
            dims = []
            while True:
                if self.at("int"):
                    self.take()
                    dims.append("int")
                else:
                    e = self.range_expr()
                    dims.append(show(e))
                if not self.at(","):
                    break
                self.take()
            self.expect("]", "']'")
            self.expect("of", "'of'")
            return f"array[{', '.join(dims)}] of {self.par_type()}"
        raise _Syntax(f"expected a type, found {self.tok.text!r}", self.tok.span)

    # -- expressions ---------------------------------------------------------

    def expr(self) -> Any:
        e = self.cmp_expr()
        while self.at("/\\"):
            t = self.take()
            e = And(e, self.cmp_expr(), span=t.span)
        return e

    def cmp_expr(self) -> Any:
        e = self.in_expr()
        if self.tok.kind in _CMP:
            t = self.take()
            e = Compare(_CMP[t.kind], e, self.in_expr(), span=t.span)
            if self.tok.kind in _CMP:
                raise _Syntax("comparison operators do not chain", self.tok.span)
        return e

    def in_expr(self) -> Any:
        e = self.range_expr()
        if self.at("in"):
            t = self.take()
            e = InSet(e, self.range_expr(), span=t.span)
        return e

    def range_expr(self) -> Any:
        e = self.add_expr()
        if self.at(".."):
            t = self.take()
            e = RangeLit(e, self.add_expr(), span=t.span)
        return e

    def add_expr(self) -> Any:
        e = self.mul_expr()
        while self.at("+", "-"):
            t = self.take()
            e = BinOp(t.kind, e, self.mul_expr(), span=t.span)
        return e

    def mul_expr(self) -> Any:
        e = self.concat_expr()
        while self.at("*", "div", "mod"):
            t = self.take()
            e = BinOp(t.kind, e, self.concat_expr(), span=t.span)
        return e

    def concat_expr(self) -> Any:
        e = self.unary()
        if self.at("++"):
            t = self.take()
            e = Concat(e, self.concat_expr(), span=t.span)
        return e

    def unary(self) -> Any:
        if self.at("-"):
            t = self.take()
            arg = self.unary()
            if isinstance(arg, IntLit):
                return IntLit(-arg.value, span=t.span)
            return Neg(arg, span=t.span)
        if self.at("+"):
            self.take()
            return self.unary()
        return self.postfix()

    def postfix(self) -> Any:
        e = self.primary()
        while self.at("["):
            t = self.take()
            idx = self.range_expr()
            self.expect("]", "']'")
            if isinstance(idx, RangeLit):
                e = StrSub(e, idx.lo, idx.hi, span=t.span)
            else:
                e = CharAt(e, idx, span=t.span)
        return e

    def primary(self) -> Any:
        t = self.tok
        if t.kind == "num":
            self.take()
            return IntLit(t.value, span=t.span)
        if t.kind == "string":
            self.take()
            return StrLit(t.value, span=t.span)
        if t.kind in ("true", "false"):
            self.take()
            return BoolLit(t.kind == "true", span=t.span)
        if t.kind == "(":
            self.take()
            e = self.expr()
            self.expect(")", "')'")
            return e
        if t.kind == "{":
            self.take()
            return SetLit(tuple(self.seq("}")), span=t.span)
        if t.kind == "[":
            self.take()
            return ArrayLit(tuple(self.seq("]")), span=t.span)
        if t.kind == "[|":
            return self.array2d()
        if t.kind == "ident":
            name = self.ident()
            if not self.at("("):
                return Ident(name.value, span=name.span)
            if name.value in ("sum", "forall") and self.peek().kind == "ident" \
                    and self.peek(2).kind == "in":
                return self.generator(name)
            self.take()
            args = self.seq(")")
            if name.value in _STRING_BUILTINS:
                arity, make = _STRING_BUILTINS[name.value]
                if len(args) != arity:
                    raise _Syntax(f"{name.value} expects {arity} arguments, got {len(args)}",
                                  name.span)
                return make(args, name.span)
            return Call(name.value, tuple(args), span=name.span)
        raise _Syntax(f"unexpected {t.text or 'end of input'!r} in expression", t.span)

    def generator(self, name: Token) -> Generator:
        self.expect("(")
        var = self.ident()
        self.expect("in", "'in'")
        rng = self.range_expr()
        if not isinstance(rng, RangeLit):
            raise _Syntax("generator needs an integer range lo..hi", var.span)
        self.expect(")", "')'")
        self.expect("(", "'('")
        body = self.expr()
        self.expect(")", "')'")
        return Generator(name.value, var.value, rng.lo, rng.hi, body, span=name.span)

    def seq(self, close: str) -> list:
        items = []
        if self.at(close):
            self.take()
            return items
        while True:
            items.append(self.expr())
            if self.at(","):
                self.take()
                if self.at(close):
                    self.take()
                    return items
                continue
            self.expect(close, repr(close))
            return items

    def array2d(self) -> Array2dLit:
        start = self.expect("[|").span
        rows = []
        row: list = []
        if self.at("|]"):
            self.take()
            return Array2dLit((), span=start)
        while True:
            row.append(self.expr())
            if self.at(","):
                self.take()
                if self.at("|", "|]"):
                    pass
                else:
                    continue
            if self.at("|"):
                self.take()
                rows.append(tuple(row))
                row = []
                if self.at("|]"):
                    self.take()
                    break
                continue
            self.expect("|]", "'|]'")
            rows.append(tuple(row))
            break
        if len({len(r) for r in rows}) > 1:
            raise _Syntax("rows of a 2-d array differ in length", start)
        return Array2dLit(tuple(rows), span=start)


def parse_model(text: str, file: Optional[str] = None) -> Model:
    """Parse model source.  Raises ParseError listing every syntax error."""
    toks = tokenize(text, file)
    p = _Parser(toks)
    acc: dict = {"decls": [], "constraints": [], "solve": None, "assign": {}}
    diags = p.items(lambda: p.model_item(acc))
    decls = list(acc["decls"])
    for name, value in acc["assign"].items():
        for k, d in enumerate(decls):
            if d.name == name:
                if isinstance(d, ParDecl) and d.value is None:
                    decls[k] = ParDecl(d.name, d.type, value, span=d.span)
                else:
                    diags.append(Diagnostic("syntax", f"cannot assign to '{name}'", value.span))
                break
        else:
            diags.append(Diagnostic("syntax", f"assignment to undeclared '{name}'", value.span))
    if diags:
        raise ParseError(diags)
    return Model(tuple(decls), tuple(acc["constraints"]), acc["solve"], file=file)


def parse_data(text: str, file: Optional[str] = None) -> dict:
    """Parse ``name = literal;`` items into a name -> value mapping."""
    from .semantics import EvalError, evaluate

    toks = tokenize(text, file)
    p = _Parser(toks)
    out: dict = {}

    def item() -> None:
        name = p.ident()
        p.expect("=", "'='")
        e = p.expr()
        if name.value in out:
            raise _Syntax(f"duplicate binding for '{name.value}'", name.span)
        try:
            out[name.value] = evaluate(e, {})
        except EvalError as exc:
            raise _Syntax(f"value of '{name.value}' is not a literal: {exc}", name.span)

    diags = p.items(item)
    if diags:
        raise ParseError(diags)
    return out


def load_model(path: str, data_path: Optional[str] = None) -> Model:
    with open(path, encoding="utf-8") as fh:
        m = parse_model(fh.read(), file=path)
    if data_path is not None:
        with open(data_path, encoding="utf-8") as fh:
            m = m.with_data(parse_data(fh.read(), file=data_path))
    return m


# -- pretty printer ------------------------------------------------------------


def _quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def show(e: Any) -> str:
    """Source text for an expression; fully parenthesised where it matters."""
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, StrLit):
        return _quote(e.text)
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, SetLit):
        return "{" + ", ".join(show(x) for x in e.items) + "}"
    if isinstance(e, ArrayLit):
        return "[" + ", ".join(show(x) for x in e.items) + "]"
    if isinstance(e, Array2dLit):
        if not e.rows:
            return "[||]"
        return "[|" + " | ".join(", ".join(show(x) for x in r) for r in e.rows) + "|]"
    if isinstance(e, RangeLit):
        return f"{show(e.lo)}..{show(e.hi)}"
    if isinstance(e, BinOp):
        return f"({show(e.lhs)} {e.op} {show(e.rhs)})"
    if isinstance(e, Neg):
        return f"(-{show(e.arg)})"
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(show(a) for a in e.args) + ")"
    if isinstance(e, Generator):
        return f"{e.kind}({e.var} in {show(e.lo)}..{show(e.hi)})({show(e.body)})"
    if isinstance(e, Concat):
        return f"({show(e.lhs)} ++ {show(e.rhs)})"
    if isinstance(e, StrLen):
        return f"str_len({show(e.arg)})"
    if isinstance(e, StrRev):
        return f"str_rev({show(e.arg)})"
    if isinstance(e, StrPow):
        return f"str_pow({show(e.arg)}, {show(e.exp)})"
    if isinstance(e, StrSub):
        return f"str_sub({show(e.arg)}, {show(e.lo)}, {show(e.hi)})"
    if isinstance(e, CharAt):
        return f"{show(e.arg)}[{show(e.index)}]"
    if isinstance(e, Compare):
        return f"({show(e.lhs)} {e.op} {show(e.rhs)})"
    if isinstance(e, And):
        return f"({show(e.lhs)} /\\ {show(e.rhs)})"
    if isinstance(e, InSet):
        return f"({show(e.arg)} in {show(e.chars)})"
    if isinstance(e, StrAlphabet):
        return f"str_alphabet({show(e.arg)}, {show(e.chars)})"
    if isinstance(e, StrRange):
        return f"str_range({show(e.arg)}, {show(e.lo)}, {show(e.hi)})"
    if isinstance(e, (StrDfa, StrNfa)):
        name = "str_dfa" if isinstance(e, StrDfa) else "str_nfa"
        args = (e.arg, e.q, e.symbols, e.table, e.q0, e.finals)
        return f"{name}(" + ", ".join(show(a) for a in args) + ")"
    if isinstance(e, StrGcc):
        return f"str_gcc({show(e.arg)}, {show(e.chars)}, {show(e.counts)})"
    raise TypeError(f"cannot print {type(e).__name__}")


def show_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return _quote(v)
    if isinstance(v, frozenset):
        return "{" + ", ".join(show_value(x) for x in sorted(v)) + "}"
    if isinstance(v, tuple):
        if v and all(isinstance(r, tuple) for r in v):
            return "[|" + " | ".join(", ".join(show_value(x) for x in r) for r in v) + "|]"
        return "[" + ", ".join(show_value(x) for x in v) + "]"
    raise TypeError(f"cannot print value {v!r}")


def pretty(m: Model) -> str:
    lines = []
    for d in m.decls:
        if isinstance(d, StringVarDecl):
            s = "var string"
            if d.max_len is not None:
                s += f"({show(d.max_len)})"
            if d.alphabet is not None:
                s += f" of {show(d.alphabet)}"
            s += f": {d.name}"
            if d.value is not None:
                s += f" = {show(d.value)}"
        elif isinstance(d, IntVarDecl):
            ty = "int" if d.domain is None else show(d.domain)
            s = f"var {ty}: {d.name}"
            if d.value is not None:
                s += f" = {show(d.value)}"
        else:
            s = f"{d.type}: {d.name}"
            if d.value is not None:
                s += f" = {show(d.value)}"
        lines.append(s + ";")
    for c in m.constraints:
        lines.append(f"constraint {show(c)};")
    if m.solve is not None:
        if m.solve.kind == "satisfy":
            lines.append("solve satisfy;")
        else:
            lines.append(f"solve {m.solve.kind} {show(m.solve.objective)};")
    return "\n".join(lines) + "\n"


def pretty_data(bindings: dict) -> str:
    return "".join(f"{k} = {show_value(v)};\n" for k, v in bindings.items())


__all__ = [
    "ParseError", "Token", "tokenize", "parse_model", "parse_data", "load_model", "show",
    "show_value", "pretty", "pretty_data",
]

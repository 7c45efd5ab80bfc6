"""Micro-models with exhaustively enumerated solution sets.

Each string constraint form gets a few tiny models over an alphabet of at
most three letters and strings of length at most three.  Solution sets come
from ``semantics.enumerate_model``, which evaluates the model directly on
candidate strings and never touches the flatteners or the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from string import Template
from typing import Iterable, Optional

from ..model import Automaton, Model
from ..parser import parse_model
from ..semantics import enumerate_model

MAX_SIGMA = 3
MAX_LEN = 3
LETTERS = "abc"

_HEAD = Template("var string($L) of $S: x;\nvar string($L) of $S: y;\n")

# form -> list of (extra declarations, constraint body)
FORMS = {
    "eq": [("", "x = y"), ("", 'x = "$A$Z"')],
    "neq": [("", "x != y")],
    "lt": [("", "x < y")],
    "le": [("", "x <= y")],
    "ge": [("", "x >= y")],
    "gt": [("", "x > y"), ("", 'x > "$Z"')],
    "in": [("", 'x in {"$A"}'), ("", 'y in {"$Z"} /\\ x = y ++ "$A"')],
    "alphabet": [("", 'str_alphabet(x, {"$A", "$Z"})'), ("", 'str_alphabet(x ++ y, {"$A"})')],
    "range": [("", 'str_range(x, "$A", "$M")'), ("", 'str_range(y, "$M", "$Z") /\\ x = y')],
    "concat": [("var string($L) of $S: z;\n", "z = x ++ y"), ("", 'x ++ "$A" = y')],
    "pow": [("var -1..$L: n;\n", "y = str_pow(x, n)"), ("", 'str_pow(x, 2) = y')],
    "rev": [("", "y = str_rev(x)"), ("", "x = str_rev(x)")],
    "sub": [("var 0..$L1: i;\nvar 0..$L1: j;\n", "y = str_sub(x, i, j)"),
            ("", 'str_sub(x, 2, 3) = "$Z"')],
    "char": [("var 0..$L1: n;\n", "x[n] = y[1]"),
             ("var 0..$L1: n;\n", 'x[n] = str_len(y) + 97')],
    "len": [("var 0..$L1: n;\n", "str_len(x) = n"),
            ("", "str_len(x) + str_len(y) = $L")],
    "dfa": [("", "str_dfa(x, 2, $SYMS, $PARITY, 1, {1})"),
            ("", "str_dfa(x, 2, $SYMS, $PARTIAL, 1, {1, 2})")],
    "nfa": [("", "str_nfa(x, 2, $SYMS, $ENDS, 1, {2})"),
            ("", "str_nfa(y, 2, $SYMS, $EMPTY, 1, {1})")],
    "gcc": [("var 0..$L: n;\n", 'str_gcc(x, ["$A"], [n])'),
            ("", 'str_gcc(x ++ y, ["$Z"], [2])'),
            ("", 'str_gcc(x, ["$A"], [$L1])')],
}


@dataclass(frozen=True)
class OracleCase:
    form: str
    name: str
    sigma: str
    max_len: int
    source: str
    solutions: frozenset

    def model(self) -> Model:
        return parse_model(self.source, file=self.name)


def _dfa_tables(sigma: str) -> dict:
    a = sigma[0]
    syms = "[" + ", ".join(f'"{c}"' for c in sigma) + "]"
    # parity of the number of a's
    parity = "[| " + ", ".join("2" if c == a else "1" for c in sigma) + " | " \
        + ", ".join("1" if c == a else "2" for c in sigma) + " |]"
    # no letter may follow an a; state 2 has only dead transitions
    partial = "[| " + ", ".join("2" if c == a else "1" for c in sigma) + " | " \
        + ", ".join("0" for _ in sigma) + " |]"
    # words ending in a
    ends = "[| " + ", ".join("{1, 2}" if c == a else "{1}" for c in sigma) + " | " \
        + ", ".join("{}" for _ in sigma) + " |]"
    empty = "[| " + ", ".join("{}" for _ in sigma) + " | " \
        + ", ".join("{2}" for _ in sigma) + " |]"
    return dict(SYMS=syms, PARITY=parity, PARTIAL=partial, ENDS=ends, EMPTY=empty)


def micro_source(form: str, k: int, sigma: str, max_len: int) -> str:
    extra, body = FORMS[form][k]
    fields = dict(
        L=max_len, L1=max_len + 1, A=sigma[0], Z=sigma[-1], M=sigma[len(sigma) // 2],
        S="{" + ", ".join(f'"{c}"' for c in sigma) + "}",
        **_dfa_tables(sigma),
    )
    text = _HEAD.substitute(fields) + Template(extra).substitute(fields)
    text += "constraint " + Template(body).substitute(fields) + ";\nsolve satisfy;\n"
    return text


def generate_oracle_suite(sigma_sizes: Iterable[int] = (1, 2, 3),
                          lengths: Iterable[int] = (1, 2, 3),
                          forms: Optional[Iterable[str]] = None) -> list:
    """Micro-models for every constraint form with their brute-force solution sets."""
    sigma_sizes, lengths = list(sigma_sizes), list(lengths)
    if any(not 1 <= s <= MAX_SIGMA for s in sigma_sizes):
        raise ValueError(f"alphabet sizes must lie in 1..{MAX_SIGMA}")
    if any(not 0 <= n <= MAX_LEN for n in lengths):
        raise ValueError(f"length bounds must lie in 0..{MAX_LEN}")
    out = []
    for form in (FORMS if forms is None else forms):
        for k in range(len(FORMS[form])):
            for s in sigma_sizes:
                sigma = LETTERS[:s]
                for n in lengths:
                    name = f"{form}/{k}/s{s}/l{n}"
                    src = micro_source(form, k, sigma, n)
                    sols = enumerate_model(parse_model(src, file=name), n)
                    out.append(OracleCase(form, name, sigma, n, src, frozenset(sols)))
    return out


def automaton_source(aut: Automaton, max_len: int) -> str:
    """A one-variable model constraining x to the language of ``aut``."""
    syms = "[" + ", ".join(f'"{c}"' for c in aut.symbols) + "]"
    alpha = "{" + ", ".join(f'"{c}"' for c in aut.symbols) + "}"

    def entry(e: object) -> str:
        if aut.deterministic:
            return str(e)
        return "{" + ", ".join(str(t) for t in sorted(e)) + "}"

    table = "[| " + " | ".join(", ".join(entry(e) for e in row) for row in aut.table) + " |]"
    finals = "{" + ", ".join(str(f) for f in sorted(aut.finals)) + "}"
    name = "str_dfa" if aut.deterministic else "str_nfa"
    return (f"var string({max_len}) of {alpha}: x;\n"
            f"constraint {name}(x, {aut.q}, {syms}, {table}, {aut.q0}, {finals});\n"
            "solve satisfy;\n")

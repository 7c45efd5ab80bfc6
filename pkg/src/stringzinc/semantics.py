"""Direct evaluation of models over concrete strings and integers.

This is the reference meaning of every construct, written against Python
strings rather than against any lowering.  Brute-force enumeration built on it
is the oracle the integer decomposition is checked against.

Undefined subexpressions (character access out of range, division by zero,
negative powers, intermediate strings longer than the length bound) make the
enclosing top-level constraint false.
"""

from __future__ import annotations

import itertools
from typing import Any, Iterator, Mapping, Optional

from .model import (
    And, Array2dLit, ArrayLit, BinOp, BoolLit, Call, CharAt, Compare, Concat, Generator,
    Ident, InSet, IntLit, IntVarDecl, Model, Neg, ParDecl, RangeLit, SetLit, StrAlphabet,
    StrDfa, StrGcc, StrLen, StrLit, StrNfa, StrPow, StrRange, StrRev, StrSub, StringVarDecl,
    char_index, to_automaton,
)


class EvalError(Exception):
    """An expression cannot be evaluated in the given environment."""


class Undefined(EvalError):
    pass


def int_div(a: int, b: int) -> int:
    if b == 0:
        raise Undefined("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def int_mod(a: int, b: int) -> int:
    return a - b * int_div(a, b)


def _as_code(v: Any) -> Any:
    if isinstance(v, str):
        if len(v) != 1:
            raise EvalError(f"cannot compare string {v!r} with an integer")
        return char_index(v)
    return v


def _compare(op: str, a: Any, b: Any) -> bool:
    if isinstance(a, str) != isinstance(b, str):
        a, b = _as_code(a), _as_code(b)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    if op == ">":
        return a > b
    raise EvalError(f"unknown comparison {op}")


def evaluate(e: Any, env: Mapping[str, Any], max_len: Optional[int] = None) -> Any:
    ev = lambda x: evaluate(x, env, max_len)  # noqa: E731

    def bounded(s: str) -> str:
        if max_len is not None and len(s) > max_len:
            raise Undefined(f"string of length {len(s)} exceeds bound {max_len}")
        return s

    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, StrLit):
        return e.text
    if isinstance(e, Ident):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"'{e.name}' has no value") from None
    if isinstance(e, SetLit):
        return frozenset(ev(x) for x in e.items)
    if isinstance(e, RangeLit):
        lo, hi = ev(e.lo), ev(e.hi)
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise EvalError("range bounds must be integers")
        return frozenset(range(lo, hi + 1))
    if isinstance(e, ArrayLit):
        return tuple(ev(x) for x in e.items)
    if isinstance(e, Array2dLit):
        return tuple(tuple(ev(x) for x in row) for row in e.rows)
    if isinstance(e, BinOp):
        a, b = ev(e.lhs), ev(e.rhs)
        if not (isinstance(a, int) and isinstance(b, int)):
            raise EvalError(f"operator {e.op} needs integers")
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "div":
            return int_div(a, b)
        if e.op == "mod":
            return int_mod(a, b)
        raise EvalError(f"unknown operator {e.op}")
    if isinstance(e, Neg):
        return -ev(e.arg)
    if isinstance(e, Call):
        args = [ev(a) for a in e.args]
        if e.name == "min":
            return min(args)
        if e.name == "max":
            return max(args)
        if e.name == "abs":
            return abs(args[0])
        if e.name == "bool2int":
            return int(bool(args[0]))
        raise EvalError(f"unknown function {e.name}")
    if isinstance(e, Generator):
        lo, hi = ev(e.lo), ev(e.hi)
        vals = (evaluate(e.body, {**env, e.var: i}, max_len) for i in range(lo, hi + 1))
        if e.kind == "sum":
            return sum(vals)
        return all(list(vals))
    if isinstance(e, Concat):
        return bounded(ev(e.lhs) + ev(e.rhs))
    if isinstance(e, StrLen):
        return len(ev(e.arg))
    if isinstance(e, StrRev):
        return ev(e.arg)[::-1]
    if isinstance(e, StrPow):
        s, n = ev(e.arg), ev(e.exp)
        if n < 0:
            raise Undefined("negative power")
        if max_len is not None and len(s) * n > max_len:
            raise Undefined("power exceeds length bound")
        return s * n
    if isinstance(e, StrSub):
        s, i, j = ev(e.arg), ev(e.lo), ev(e.hi)
        n, m = max(1, i), min(j, len(s))
        return s[n - 1:m] if m >= n else ""
    if isinstance(e, CharAt):
        s, n = ev(e.arg), ev(e.index)
        if not 1 <= n <= len(s):
            raise Undefined(f"character index {n} outside 1..{len(s)}")
        return char_index(s[n - 1])
    if isinstance(e, Compare):
        return _compare(e.op, ev(e.lhs), ev(e.rhs))
    if isinstance(e, And):
        a, b = ev(e.lhs), ev(e.rhs)
        return bool(a) and bool(b)
    if isinstance(e, InSet):
        return set(ev(e.arg)) <= ev(e.chars)
    if isinstance(e, StrAlphabet):
        return set(ev(e.arg)) == set(ev(e.chars))
    if isinstance(e, StrRange):
        s, a, b = ev(e.arg), ev(e.lo), ev(e.hi)
        return all(a <= c <= b for c in s)
    if isinstance(e, (StrDfa, StrNfa)):
        aut = to_automaton(ev(e.q), ev(e.symbols), ev(e.table), ev(e.q0), ev(e.finals),
                           deterministic=isinstance(e, StrDfa))
        return aut.accepts(ev(e.arg))
    if isinstance(e, StrGcc):
        s, chars, counts = ev(e.arg), ev(e.chars), ev(e.counts)
        return all(s.count(c) == k for c, k in zip(chars, counts))
    raise EvalError(f"cannot evaluate {type(e).__name__}")


def holds(e: Any, env: Mapping[str, Any], max_len: Optional[int] = None) -> bool:
    try:
        return bool(evaluate(e, env, max_len))
    except Undefined:
        return False


def satisfies(m: Model, assignment: Mapping[str, Any], max_len: Optional[int] = None) -> bool:
    env = m.param_env()
    env.update(assignment)
    for d in m.decls:
        if isinstance(d, (StringVarDecl, IntVarDecl)) and d.value is not None:
            try:
                if evaluate(d.value, env, max_len) != env[d.name]:
                    return False
            except Undefined:
                return False
    return all(holds(c, env, max_len) for c in m.constraints)


def strings_upto(alphabet: Any, n: int) -> Iterator[str]:
    chars = sorted(alphabet)
    for k in range(n + 1):
        for t in itertools.product(chars, repeat=k):
            yield "".join(t)


def var_domains(m: Model, max_len: int) -> dict:
    """Finite candidate values per variable under length bound ``max_len``."""
    env = m.param_env()
    out: dict = {}
    for d in m.decls:
        if isinstance(d, StringVarDecl):
            cap = max_len if d.max_len is None else min(evaluate(d.max_len, env), max_len)
            alpha = None if d.alphabet is None else evaluate(d.alphabet, env)
            if alpha is None:
                raise EvalError(f"'{d.name}' ranges over all of ASCII; enumeration refused")
            out[d.name] = list(strings_upto(alpha, cap))
        elif isinstance(d, IntVarDecl):
            if d.domain is None:
                raise EvalError(f"'{d.name}' has no finite domain")
            out[d.name] = sorted(evaluate(d.domain, env))
    return out


def enumerate_model(m: Model, max_len: int, limit: int = 2_000_000) -> set:
    """All solutions by exhaustive enumeration, as frozensets of (name, value)."""
    doms = var_domains(m, max_len)
    names = list(doms)
    total = 1
    for n in names:
        total *= len(doms[n])
    if total > limit:
        raise EvalError(f"{total} candidate assignments exceed the enumeration cap {limit}")
    sols = set()
    for combo in itertools.product(*(doms[n] for n in names)):
        a = dict(zip(names, combo))
        if satisfies(m, a, max_len):
            sols.add(frozenset(a.items()))
    return sols


def int_bounds(e: Any, m: Model, env: Mapping[str, Any],
               str_cap: Optional[Mapping[str, int]] = None) -> tuple:
    """Interval (lo, hi) containing every value of integer expression ``e``.

    ``None`` marks an unbounded side.
    """
    def rec(x: Any) -> tuple:
        return int_bounds(x, m, env, str_cap)

    if isinstance(e, IntLit):
        return e.value, e.value
    if isinstance(e, Ident):
        v = env.get(e.name)
        if isinstance(v, int):
            return v, v
        d = m.decl(e.name)
        if isinstance(d, IntVarDecl) and d.domain is not None:
            try:
                dom = evaluate(d.domain, env)
                return min(dom), max(dom)
            except (EvalError, ValueError):
                return None, None
        return None, None
    if isinstance(e, Neg):
        lo, hi = rec(e.arg)
        return (None if hi is None else -hi), (None if lo is None else -lo)
    if isinstance(e, BinOp):
        (a, b), (c, d) = rec(e.lhs), rec(e.rhs)
        if e.op == "+":
            return _add(a, c), _add(b, d)
        if e.op == "-":
            return _add(a, None if d is None else -d), _add(b, None if c is None else -c)
        if None in (a, b, c, d):
            if e.op == "mod" and c is not None and d is not None:
                k = max(abs(c), abs(d))
                return -(k - 1), k - 1
            return None, None
        if e.op == "*":
            ps = [a * c, a * d, b * c, b * d]
            return min(ps), max(ps)
        if e.op == "div":
            k = max(abs(a), abs(b))
            return -k, k
        if e.op == "mod":
            k = max(abs(c), abs(d))
            return -(k - 1), k - 1
    if isinstance(e, Call):
        if e.name == "bool2int":
            return 0, 1
        bs = [rec(x) for x in e.args]
        if e.name == "abs":
            lo, hi = bs[0]
            if lo is None or hi is None:
                return 0, None
            return (0 if lo <= 0 <= hi else min(abs(lo), abs(hi))), max(abs(lo), abs(hi))
        if e.name in ("min", "max"):
            (a, b), (c, d) = bs
            if e.name == "min":
                lo = None if a is None or c is None else min(a, c)
                hi = b if d is None else (d if b is None else min(b, d))
            else:
                lo = a if c is None else (c if a is None else max(a, c))
                hi = None if b is None or d is None else max(b, d)
            return lo, hi
    if isinstance(e, StrLen):
        return 0, _str_cap(e.arg, m, env, str_cap)
    if isinstance(e, CharAt):
        return 1, 128
    if isinstance(e, Generator) and e.kind == "sum":
        try:
            lo, hi = evaluate(e.lo, env), evaluate(e.hi, env)
        except EvalError:
            return None, None
        tlo, thi = 0, 0
        for i in range(lo, hi + 1):
            a, b = int_bounds(e.body, m, {**env, e.var: i}, str_cap)
            tlo, thi = _add(tlo, a), _add(thi, b)
        return tlo, thi
    return None, None


def _add(a: Optional[int], b: Optional[int]) -> Optional[int]:
    return None if a is None or b is None else a + b


def _str_cap(e: Any, m: Model, env: Mapping[str, Any],
             str_cap: Optional[Mapping[str, int]]) -> Optional[int]:
    if isinstance(e, StrLit):
        return len(e.text)
    if isinstance(e, Ident):
        if str_cap and e.name in str_cap:
            return str_cap[e.name]
        v = env.get(e.name)
        if isinstance(v, str):
            return len(v)
        d = m.decl(e.name)
        if isinstance(d, StringVarDecl) and d.max_len is not None:
            try:
                return evaluate(d.max_len, env)
            except EvalError:
                return None
        return None
    return None

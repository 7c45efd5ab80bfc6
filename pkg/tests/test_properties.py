import itertools

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from stringzinc import ParseError, char_index, char_of, parse_model, validate
from stringzinc.flat import FlatConstraint, check_constraint
from stringzinc.parser import pretty
from stringzinc.solver import FAILED, Solver

# -- parser ------------------------------------------------------------------------

TOKENS = ["var", "string", "int", "(", ")", "[", "]", "{", "}", "[|", "|]", "|", ":", ";", ",",
          "..", "++", "=", "!=", "<", "<=", "x", "y", "n", '"ab"', '""', "3", "0", "of",
          "constraint", "solve", "satisfy", "minimize", "str_len", "str_rev", "str_pow",
          "str_sub", "str_dfa", "str_gcc", "in", "/\\", "+", "-", "*", "div", "mod", "\n",
          "% c\n", "sum", "forall", "i", "bool2int", "\"", "@", "é"]


@settings(max_examples=400, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), max_size=40))
def test_parser_is_total_on_token_soup(toks):
    text = " ".join(toks)
    try:
        m = parse_model(text)
    except ParseError as exc:
        assert exc.diagnostics
    else:
        validate(m)


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=80))
def test_parser_is_total_on_text(text):
    try:
        parse_model(text)
    except ParseError:
        pass


CHARS = st.sampled_from("abc")
LIT = st.builds(lambda cs: '"' + "".join(cs) + '"', st.lists(CHARS, max_size=3))
SVAR = st.sampled_from(["x", "y"])


def string_exprs():
    return st.recursive(
        st.one_of(SVAR, LIT),
        lambda inner: st.one_of(
            st.builds(lambda a, b: f"({a} ++ {b})", inner, inner),
            st.builds(lambda a: f"str_rev({a})", inner),
            st.builds(lambda a, k: f"str_pow({a}, {k})", inner, st.integers(0, 2)),
            st.builds(lambda a, i, j: f"str_sub({a}, {i}, {j})", inner, st.integers(0, 3),
                      st.integers(0, 3)),
        ),
        max_leaves=4,
    )


def int_exprs():
    return st.recursive(
        st.one_of(st.sampled_from(["n", "0", "3"]),
                  st.builds(lambda s: f"str_len({s})", string_exprs())),
        lambda inner: st.builds(lambda a, op, b: f"({a} {op} {b})", inner,
                                st.sampled_from(["+", "-", "*", "div", "mod"]), inner),
        max_leaves=3,
    )


constraints = st.one_of(
    st.builds(lambda a, op, b: f"{a} {op} {b}", string_exprs(),
              st.sampled_from(["=", "!=", "<", "<=", ">=", ">"]), string_exprs()),
    st.builds(lambda a, op, b: f"{a} {op} {b}", int_exprs(),
              st.sampled_from(["=", "!=", "<", "<="]), int_exprs()),
    st.builds(lambda a: f'{a} in {{"a", "b"}}', string_exprs()),
    st.builds(lambda a: f'str_range({a}, "a", "c")', string_exprs()),
    st.builds(lambda a: f'str_alphabet({a}, {{"a"}})', string_exprs()),
    st.builds(lambda a: f'str_gcc({a}, ["a", "b"], [n, 1])', string_exprs()),
    st.builds(lambda a: f'{a}[n] = 98', string_exprs()),
    st.builds(lambda a: f'str_dfa({a}, 2, ["a", "b"], [| 1, 2 | 0, 2 |], 1, {{1, 2}})',
              string_exprs()),
    st.builds(lambda a: f'str_nfa({a}, 2, ["a"], [| {{1, 2}} | {{}} |], 1, {{2}})',
              string_exprs()),
)


@st.composite
def models(draw):
    head = 'var string(3) of {"a", "b", "c"}: x;\nvar string: y;\nvar 0..3: n;\n'
    cs = draw(st.lists(constraints, min_size=1, max_size=3))
    solve = draw(st.sampled_from(["solve satisfy;", "solve minimize str_len(x);",
                                  "solve maximize n;"]))
    return head + "".join(f"constraint {c};\n" for c in cs) + solve + "\n"


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(models())
def test_pretty_round_trip(src):
    m = parse_model(src)
    assert parse_model(pretty(m)) == m


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(models())
def test_validate_repeatable(src):
    m = parse_model(src)
    assert validate(m) == validate(m)


@given(st.characters(max_codepoint=127))
def test_char_index_bijection(c):
    k = char_index(c)
    assert 1 <= k <= 128 and char_of(k) == c


# -- propagation -----------------------------------------------------------------------

VARS = ["a", "b", "c", "d"]


@st.composite
def flat_constraint(draw):
    v = st.sampled_from(VARS)
    atom = st.one_of(v, st.integers(-1, 4))
    kind = draw(st.sampled_from([
        "lin", "int_eq", "int_ne", "int_le", "int_lt", "reif", "bool_clause", "element",
        "fn", "int_abs", "lex_lesseq", "global_cardinality", "regular",
    ]))
    if kind == "lin":
        n = draw(st.integers(1, 3))
        coefs = tuple(draw(st.lists(st.integers(-3, 3).filter(bool), min_size=n, max_size=n)))
        xs = tuple(draw(st.lists(v, min_size=n, max_size=n)))
        name = draw(st.sampled_from(["int_lin_eq", "int_lin_le", "int_lin_ne"]))
        return FlatConstraint(name, (coefs, xs, draw(st.integers(-4, 8))))
    if kind.startswith("int_") and kind != "int_abs":
        return FlatConstraint(kind, (draw(v), draw(atom)))
    if kind == "reif":
        name = draw(st.sampled_from(["int_eq_reif", "int_ne_reif", "int_le_reif"]))
        return FlatConstraint(name, (draw(v), draw(atom), draw(v)))
    if kind == "bool_clause":
        return FlatConstraint(kind, (tuple(draw(st.lists(v, max_size=2))),
                                     tuple(draw(st.lists(v, max_size=2)))))
    if kind == "element":
        arr = tuple(draw(st.lists(atom, min_size=1, max_size=4)))
        return FlatConstraint("array_var_int_element", (draw(v), arr, draw(v)))
    if kind == "fn":
        name = draw(st.sampled_from(["int_times", "int_div", "int_mod", "int_min", "int_max"]))
        return FlatConstraint(name, (draw(v), draw(atom), draw(v)))
    if kind == "int_abs":
        return FlatConstraint(kind, (draw(v), draw(v)))
    if kind == "lex_lesseq":
        n = draw(st.integers(1, 3))
        return FlatConstraint(kind, (tuple(draw(st.lists(atom, min_size=n, max_size=n))),
                                     tuple(draw(st.lists(atom, min_size=n, max_size=n)))))
    if kind == "global_cardinality":
        xs = tuple(draw(st.lists(v, min_size=1, max_size=3)))
        cover = tuple(sorted(draw(st.sets(st.integers(0, 3), min_size=1, max_size=2))))
        counts = tuple(draw(st.lists(atom, min_size=len(cover), max_size=len(cover))))
        return FlatConstraint(kind, (xs, cover, counts))
    q, s = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    table = tuple(draw(st.lists(st.integers(0, q), min_size=q * s, max_size=q * s)))
    xs = tuple(draw(st.lists(v, min_size=1, max_size=3)))
    finals = frozenset(draw(st.sets(st.integers(1, q))))
    return FlatConstraint("regular", (xs, q, s, table, draw(st.integers(1, q)), finals))


@st.composite
def flat_instances(draw):
    doms = {}
    for name in VARS:
        lo = draw(st.integers(-1, 2))
        doms[name] = (lo, lo + draw(st.integers(0, 3)))
    cs = draw(st.lists(flat_constraint(), min_size=1, max_size=4))
    text = "".join(f"var {lo}..{hi}: {n};\n" for n, (lo, hi) in doms.items())
    text += "".join(f"constraint {c};\n" for c in cs) + "solve satisfy;\n"
    return doms, cs, text


def brute_force(doms, cs):
    names = list(doms)
    for combo in itertools.product(*(range(lo, hi + 1) for lo, hi in doms.values())):
        asg = dict(zip(names, combo))
        if all(check_constraint(c, asg) for c in cs):
            yield asg


def _finals_ok(cs):
    return all(c.name != "regular" or all(1 <= f <= c.args[1] for f in c.args[5]) for c in cs)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(flat_instances())
def test_propagation_is_sound(inst):
    doms, cs, text = inst
    assume(_finals_ok(cs))
    sols = list(brute_force(doms, cs))
    s = Solver(text)
    if s.propagate() == FAILED:
        assert sols == []
        return
    snapshot = {n: set(s.domain(n)) for n in VARS}
    for asg in sols:
        for n, val in asg.items():
            assert val in snapshot[n], (n, val, cs)
    # a second run at the fixpoint changes nothing
    assert s.propagate() != FAILED
    assert {n: set(s.domain(n)) for n in VARS} == snapshot


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(flat_instances())
def test_search_is_complete(inst):
    doms, cs, text = inst
    assume(_finals_ok(cs))
    want = {tuple(sorted(a.items())) for a in brute_force(doms, cs)}
    # make every variable a decision variable so all-solutions mode enumerates them
    out = "".join(line.replace(";", " :: output_var;", 1) if line.startswith("var ") else line
                  for line in text.splitlines(keepends=True))
    res = Solver(out).solve(all_solutions=True)
    got = {tuple(sorted((n, sol.assignment[n]) for n in VARS)) for sol in res.solutions}
    assert got == want

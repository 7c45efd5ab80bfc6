import pytest

from stringzinc import FlattenError, flatten_int, load_model, parse_model
from stringzinc.flat import parse_flat
from stringzinc.flatten_int import DEFAULT_MAX_LEN, INT_BOUND
from stringzinc.semantics import enumerate_model
from stringzinc.solver import Solver

from conftest import PALINDROME, lowered, solve_all, xs

AB2 = 'var string(2) of {"a", "b"}: x;\nvar string(2) of {"a", "b"}: y;\n'
WORDS_AB2 = ["", "a", "b", "aa", "ab", "ba", "bb"]


def sat(src: str, ell: int = 10) -> bool:
    return Solver(lowered(src, ell)).solve().status != "UNSATISFIABLE"


def only(src: str, ell: int = 10) -> set:
    return xs(solve_all(src, ell))


# -- string variables ------------------------------------------------------------

def test_lowered_variable_domains():
    inst = flatten_int(parse_model('var string(3) of {"a","b"}: x;'), 1000)
    (s,) = inst.strings
    assert len(s.chars) == 3
    for c in s.chars:
        assert inst.vars[c].domain_values() == {0, 98, 99}
    assert inst.vars[s.length].domain_values() == {0, 1, 2, 3}
    assert inst.warnings == []


def test_unbounded_string_is_truncated_with_warning():
    inst = flatten_int(parse_model("var string: x;"), 1000)
    assert len(inst.strings[0].chars) == 1000
    assert len(inst.warnings) == 1
    assert "'x'" in inst.warnings[0] and "1000" in inst.warnings[0]


def test_bound_above_ell_warns():
    inst = flatten_int(parse_model("var string(50): x;"), 10)
    assert len(inst.strings[0].chars) == 10 and len(inst.warnings) == 1


def test_zero_capacity():
    inst = flatten_int(parse_model("var string(0): x;"), 10)
    (s,) = inst.strings
    assert s.chars == () or len(s.chars) == 0
    assert only("var string(0): x;") == {""}


def test_default_and_environment_bound(monkeypatch):
    monkeypatch.delenv("STRINGZINC_MAX_LEN", raising=False)
    assert DEFAULT_MAX_LEN == 1000
    assert len(flatten_int(parse_model("var string: x;")).strings[0].chars) == 1000
    monkeypatch.setenv("STRINGZINC_MAX_LEN", "7")
    assert len(flatten_int(parse_model("var string: x;")).strings[0].chars) == 7
    monkeypatch.setenv("STRINGZINC_MAX_LEN", "zero")
    with pytest.raises(FlattenError):
        flatten_int(parse_model("var string: x;"))


@pytest.mark.parametrize("ell", [0, -3])
def test_bad_bound_rejected(ell):
    with pytest.raises(FlattenError):
        flatten_int(parse_model("var string: x;"), ell)


def test_unbounded_int_domain():
    inst = flatten_int(parse_model("var int: n;\nconstraint n > 3;"), 5)
    assert (inst.vars["n"].lo, inst.vars["n"].hi) == (-INT_BOUND, INT_BOUND)


def test_invalid_model_refused():
    with pytest.raises(FlattenError) as info:
        flatten_int(parse_model("int: N;\nvar string(N): x;"), 5)
    assert info.value.diagnostics[0].kind == "unbound-parameter"


# -- equality and order -------------------------------------------------------------

def test_eq_pairs():
    sols = solve_all(AB2 + "constraint x = y;", 10)
    assert len(sols) == 7
    assert {(dict(s)["x"], dict(s)["y"]) for s in sols} == {(w, w) for w in WORDS_AB2}


def test_neq_pairs():
    assert len(solve_all(AB2 + "constraint x != y;", 10)) == 42


def test_reflexive_eq():
    assert only('var string(2) of {"a", "b"}: x;\nconstraint x = x;') == set(WORDS_AB2)


def test_order_examples():
    assert sat('constraint "ab" <= "abc";\nvar string(1): x;')
    assert not sat('var string(3): x;\nconstraint x < x;')


@pytest.mark.parametrize("op,fn", [
    ("<", lambda a, b: a < b), ("<=", lambda a, b: a <= b),
    (">=", lambda a, b: a >= b), (">", lambda a, b: a > b),
])
def test_order_matches_lexicographic(op, fn):
    sols = solve_all(AB2 + f"constraint x {op} y;", 10)
    expect = {(a, b) for a in WORDS_AB2 for b in WORDS_AB2 if fn(a, b)}
    assert {(dict(s)["x"], dict(s)["y"]) for s in sols} == expect


# -- character sets -------------------------------------------------------------------

def test_range_expands_to_charset():
    inst = flatten_int(parse_model('var string(2): x;\nconstraint str_range(x, "a", "d");'), 5)
    posted = {c.args[0]: c.args[1] for c in inst.constraints if c.name == "set_in"}
    assert set(posted) == set(inst.strings[0].chars)
    assert all(v == {0, 98, 99, 100, 101} for v in posted.values())
    s = Solver(inst.emit())
    s.propagate()
    assert set(s.domain(inst.strings[0].chars[0])) == {0, 98, 99, 100, 101}


def test_exact_alphabet():
    assert only('var string(2): x;\nconstraint str_alphabet(x, {"a"});') == {"a", "aa"}


def test_full_ascii_subset_is_vacuous():
    chars = ", ".join('"\\\\"' if k == 92 else '"\\""' if k == 34 else
                      '"\\n"' if k == 10 else '"\\t"' if k == 9 else f'"{chr(k)}"'
                      for k in range(128))
    a = flatten_int(parse_model("var string(2): x;"), 5)
    b = flatten_int(parse_model(f"var string(2): x;\nconstraint x in {{{chars}}};"), 5)
    for c in b.strings[0].chars:
        assert b.vars[c].domain_values() == a.vars[c].domain_values()


def test_empty_range_forces_empty_string():
    assert only('var string(2): x;\nconstraint str_range(x, "d", "a");') == {""}


# -- string functions -------------------------------------------------------------------

def test_concat_examples():
    assert only('var string(5): x;\nconstraint x = "ab" ++ "c";') == {"abc"}
    sols = solve_all(AB2 + 'var string(4) of {"a","b"}: z;\nconstraint z = x ++ "";', 10)
    assert all(dict(s)["z"] == dict(s)["x"] for s in sols) and len(sols) == 7 * 7


def test_concat_relation():
    sols = solve_all(AB2 + 'var string(4) of {"a","b"}: z;\nconstraint z = x ++ y;', 10)
    assert {(dict(s)["x"], dict(s)["y"], dict(s)["z"]) for s in sols} == \
        {(a, b, a + b) for a in WORDS_AB2 for b in WORDS_AB2}


def test_substring_examples():
    assert xs(solve_all('var string(5): x;\nvar string(5): y;\n'
                        'constraint x = "abcde";\nconstraint y = str_sub(x, 2, 4);', 5), "y") == {"bcd"}
    assert xs(solve_all('var string(5): x;\nvar string(5): y;\n'
                        'constraint x = "abcde";\nconstraint y = x[4..2];', 5), "y") == {""}
    assert xs(solve_all('var string(5): x;\nvar string(5): y;\n'
                        'constraint x = "abcde";\nconstraint y = x[0..99];', 5), "y") == {"abcde"}


def test_char_access_examples():
    src = 'var string(3): x;\nvar 0..4: n;\nvar 0..128: a;\nconstraint x = "abc";\n'
    sols = solve_all(src + "constraint n = 2;\nconstraint a = x[n];", 5)
    assert [dict(s)["a"] for s in sols] == [99]
    assert not sat(src + "constraint n = 0;\nconstraint a = x[n];", 5)


def test_char_access_agrees_with_unit_substring():
    head = 'var string(3) of {"a", "b"}: x;\nvar 0..4: n;\nvar 0..128: a;\n'
    via_char = solve_all(head + "constraint a = x[n];", 3)
    via_sub = solve_all(head + 'var string(3) of {"a","b"}: y;\n'
                        "constraint y = str_sub(x, n, n);\nconstraint str_len(y) = 1;\n"
                        "constraint a = y[1];", 3)
    strip = {frozenset((k, v) for k, v in s if k != "y") for s in via_sub}
    assert via_char == strip and len(via_char) > 0


def test_pow_and_rev_examples():
    assert only('var string(4): x;\nconstraint x = str_pow("ab", 2);') == {"abab"}
    sols = solve_all(AB2 + "var 0..2: n;\nconstraint n = 0;\nconstraint y = str_pow(x, n);", 5)
    assert {dict(s)["y"] for s in sols} == {""} and len(sols) == 7
    sols = solve_all('var string(3) of {"a","b"}: x;\nconstraint str_rev(str_rev(x)) = x;', 3)
    assert len(sols) == 15


def test_length_examples():
    assert only('var string(3): x;\nconstraint str_len(x) = 0;') == {""}
    inst = flatten_int(parse_model('var string(3): x;\nvar 0..9: n;\n'
                                   'constraint x = "abc";\nconstraint n = str_len(x);'), 5)
    sols = Solver(inst.emit()).solve(all_solutions=True).solutions
    assert [s.decoded()["n"] for s in sols] == [3]
    inst = flatten_int(parse_model("var string(3): x;"), 5)
    assert inst.vars[inst.strings[0].length].domain_values() == {0, 1, 2, 3}


# -- automata and cardinality --------------------------------------------------------------

ASTAR_BSTAR = '["a", "b"], [| 1, 2 | 0, 2 |], 1, {1, 2}'


def test_regular_examples():
    base = 'var string(3) of {"a","b"}: x;\n'
    assert sat(base + f'constraint x = "ab";\nconstraint str_dfa(x, 2, {ASTAR_BSTAR});')
    assert not sat(base + f'constraint x = "ba";\nconstraint str_dfa(x, 2, {ASTAR_BSTAR});')
    assert "" in only(base + 'constraint str_dfa(x, 2, ["a"], [| 2 | 2 |], 1, {1});')
    assert "" not in only(base + 'constraint str_dfa(x, 2, ["a"], [| 2 | 2 |], 1, {2});')


def test_nfa_state_cap():
    m = parse_model('var string(3) of {"a","b"}: x;\n'
                    'constraint str_nfa(x, 3, ["a","b"], [| {1,2}, {1} | {3}, {3} | {}, {} |], 1, {3});')
    with pytest.raises(FlattenError, match="state"):
        flatten_int(m, 3, state_cap=2)
    assert flatten_int(m, 3).constraints


def test_gcc_examples():
    sols = solve_all('var string(4): x;\nvar 0..4: p;\nvar 0..4: q;\nvar 0..4: r;\n'
                     'constraint x = "abca";\nconstraint str_gcc(x, ["a","b","c"], [p, q, r]);', 4)
    assert [(dict(s)["p"], dict(s)["q"], dict(s)["r"]) for s in sols] == [(2, 1, 1)]


def test_gcc_matches_scan():
    src = 'var string(3) of {"a","b"}: x;\nvar 0..3: n;\nconstraint str_gcc(x, ["a"], [n]);'
    sols = solve_all(src, 3)
    assert {(dict(s)["x"], dict(s)["n"]) for s in sols} == \
        {(w, w.count("a")) for w in xs(sols)}
    assert len(sols) == 15


# -- whole-instance properties -------------------------------------------------------------

def test_palindrome_optimum_at_15():
    res = Solver(flatten_int(load_model(str(PALINDROME)), 15).emit()).solve()
    assert res.status == "OPTIMAL"
    assert res.best.decoded() == {"x": "abcdcba", "n": 2}


def test_integer_only_model_has_no_arrays():
    inst = flatten_int(parse_model("var 0..5: a;\nvar 0..5: b;\nconstraint a + b = 7;"), 10)
    assert inst.strings == [] and "array" not in inst.emit()
    sols = Solver(inst.emit()).solve(all_solutions=True).solutions
    assert {(s.decoded()["a"], s.decoded()["b"]) for s in sols} == {(2, 5), (3, 4), (4, 3), (5, 2)}


def test_deterministic_output():
    m = load_model(str(PALINDROME))
    assert flatten_int(m, 30).emit() == flatten_int(m, 30).emit()


def test_one_array_per_variable():
    inst = flatten_int(parse_model(
        'var string(3): x;\nvar string(3): y;\nconstraint x != y;\nconstraint x < y;\n'
        'constraint str_len(x) = 2;\nconstraint str_rev(x) = y;'), 5)
    names = list(inst.vars)
    assert sum(n.startswith("_X_x_") for n in names) == 3
    assert sum(n == "_L_x" for n in names) == 1
    assert len(inst.strings) == 2


def test_only_integer_entities():
    text = flatten_int(load_model(str(PALINDROME)), 20).emit()
    p = parse_flat(text)
    assert "string" not in text.replace("output_string", "")
    assert all(d is not None for d in p.vars.values())


def test_solution_sets_grow_with_bound():
    src = 'var string of {"a","b"}: x;\nconstraint str_len(x) mod 2 = 0;'
    prev = set()
    for ell in (1, 2, 3, 4):
        cur = only(src, ell)
        assert prev <= cur
        assert cur == {dict(s)["x"] for s in enumerate_model(parse_model(src), ell)}
        prev = cur

import pytest

from stringzinc import flatten_int, load_model, parse_model
from stringzinc.corpus.oracle import generate_oracle_suite
from stringzinc.solver import (
    AT_FIXPOINT, FAILED, IntDomain, Solver, UnsupportedConstraint, VerificationError,
)

from conftest import PALINDROME, lowered

XY = "var 0..2: x;\nvar 0..2: y;\nconstraint int_lin_eq([1,1],[x,y],3);\nsolve satisfy;\n"
ASTAR_BSTAR = ('var string(3) of {"a","b"}: x;\n'
               'constraint str_dfa(x, 2, ["a", "b"], [| 1, 2 | 0, 2 |], 1, {1, 2});\n')


def with_constraint(text: str, c: str) -> str:
    body, solve = text.rsplit("solve", 1)
    return body + f"constraint {c};\nsolve" + solve


def test_posting_does_not_prune():
    s = Solver(XY)
    assert list(s.domain("x")) == [0, 1, 2] and list(s.domain("y")) == [0, 1, 2]


def test_linear_bounds():
    s = Solver(XY)
    assert s.propagate() == AT_FIXPOINT
    assert s.domain("x").ranges == ((1, 2),) and s.domain("y").ranges == ((1, 2),)
    assert s.propagate() == AT_FIXPOINT
    assert s.domain("x").ranges == ((1, 2),)


def test_contradictory_bounds():
    s = Solver("var 0..5: x;\nconstraint int_le(1, x);\nconstraint int_le(x, 0);\nsolve satisfy;")
    assert s.propagate() == FAILED
    assert s.solve().status == "UNSATISFIABLE"


def test_empty_constraint_set():
    s = Solver("var 0..3: x;\nsolve satisfy;")
    assert s.propagate() == AT_FIXPOINT
    assert list(s.domain("x")) == [0, 1, 2, 3]


def test_regular_registered_once():
    text = lowered(ASTAR_BSTAR, 3)
    posted = sum(line.startswith("constraint regular(") for line in text.splitlines())
    s = Solver(text)
    assert posted == 1 and s.registry["Regular"] == posted


def test_regular_prunes_after_b():
    text = with_constraint(lowered(ASTAR_BSTAR, 3), "int_eq(_Y1, 3)")
    s = Solver(text)
    assert s.propagate() == AT_FIXPOINT
    # symbol 2 is a, 3 is b, 1 is padding
    assert 2 not in s.domain("_Y2") and 2 not in s.domain("_Y3")
    assert 99 in s.domain("_X_x_2") and 98 not in s.domain("_X_x_2")


def test_unsupported_constraint():
    with pytest.raises(UnsupportedConstraint, match="float_plus"):
        Solver("var 0..1: x;\nconstraint float_plus(x, x, x);\nsolve satisfy;")


def test_minimize_length():
    src = "var string(15): x;\nconstraint str_len(x) >= 7;\nsolve minimize str_len(x);"
    res = Solver(lowered(src, 15)).solve()
    assert res.status == "OPTIMAL" and res.best.objective == 7


def test_maximize():
    src = 'var string(4) of {"a"}: x;\nconstraint str_len(x) <= 3;\nsolve maximize str_len(x);'
    res = Solver(lowered(src, 4)).solve()
    assert res.status == "OPTIMAL" and res.best.decoded() == {"x": "aaa"}


def test_contradiction():
    src = "var string(3): x;\nvar string(3): y;\nconstraint x = y;\nconstraint x != y;"
    assert Solver(lowered(src, 3)).solve().status == "UNSATISFIABLE"


def test_palindrome_at_15():
    res = Solver(flatten_int(load_model(str(PALINDROME)), 15).emit()).solve()
    assert res.status == "OPTIMAL"
    assert res.best.decoded() == {"n": 2, "x": "abcdcba"}
    assert res.best.objective == 7


def test_node_limit_reports_unknown():
    s = Solver(flatten_int(load_model(str(PALINDROME)), 15).emit())
    res = s.solve(node_limit=3)
    assert res.status == "UNKNOWN" and not res.complete


def test_repeat_runs_are_identical():
    s = Solver(flatten_int(load_model(str(PALINDROME)), 15).emit())
    a, b = s.solve(), s.solve()
    assert a.status == b.status
    assert [x.decoded() for x in a.solutions] == [x.decoded() for x in b.solutions]
    da, db = a.stats.as_dict(), b.stats.as_dict()
    da.pop("solveTime"), db.pop("solveTime")
    assert da == db


def test_verifier_rejects_bad_assignment():
    s = Solver(XY)
    with pytest.raises(VerificationError):
        s.check({"x": 0, "y": 0})
    s.check({"x": 1, "y": 2})


def test_all_solutions_needs_satisfy():
    with pytest.raises(ValueError):
        Solver(lowered("var string(2): x;\nsolve minimize str_len(x);", 2)).solve(all_solutions=True)


def test_stats_fields():
    res = Solver(flatten_int(load_model(str(PALINDROME)), 15).emit()).solve()
    d = res.stats.as_dict()
    assert set(d) == {"nodes", "failures", "propagations", "peakDepth", "solutions", "solveTime"}
    assert d["nodes"] > 0 and d["solutions"] >= 1 and d["peakDepth"] >= 1


def test_int_domain_ranges():
    d = IntDomain.from_bits(0b1011_0111, 10)
    assert d.ranges == ((10, 12), (14, 15), (17, 17))
    assert len(d) == 6 and d.min == 10 and d.max == 17 and 14 in d and 13 not in d


def test_branch_and_bound_on_oracle_models():
    """Minimum total length equals the brute-force minimum over each solution set."""
    for case in generate_oracle_suite(sigma_sizes=(2,)):
        if not case.solutions:
            continue
        src = case.source.replace("solve satisfy;", "solve minimize str_len(x) + 2 * str_len(y);")
        res = Solver(flatten_int(parse_model(src), case.max_len).emit()).solve()
        want = min(len(dict(s)["x"]) + 2 * len(dict(s)["y"]) for s in case.solutions)
        assert res.status == "OPTIMAL" and res.best.objective == want, case.name

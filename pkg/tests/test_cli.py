import io
import subprocess
import sys

import pytest

from stringzinc import char_index, flatten_int, parse_model
from stringzinc.cli import RunConfig, execute, main, quote, read_solutions
from stringzinc.corpus.oracle import generate_oracle_suite
from stringzinc.solver import Solver

from conftest import PALINDROME


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="m.szn"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_palindrome(capsys):
    code, out, _ = run(capsys, PALINDROME, "-l", 15)
    assert code == 0
    sols, final = read_solutions(out)
    assert sols[-1] == {"n": 2, "x": "abcdcba"} and final == "=========="
    assert out.index("% WARNING:") < out.index("x = ")
    assert out.rstrip().endswith("==========")


def test_flatten_only_str(capsys):
    code, out, _ = run(capsys, PALINDROME, "--flatten-only", "--target", "str")
    assert code == 0
    assert "str_rev(x, x)" in out and "----------" not in out


def test_flatten_only_int_prints_warning(capsys):
    code, out, _ = run(capsys, PALINDROME, "--flatten-only", "-l", 20)
    assert code == 0
    assert out.startswith("% WARNING: string variable 'x' has no length bound")
    assert "regular" not in out and "global_cardinality" in out


def test_unsat(capsys, tmp_path):
    p = write(tmp_path, 'var string: x;\nconstraint x = "a" ++ x;\nsolve satisfy;\n')
    code, out, _ = run(capsys, p, "-l", 30)
    assert code == 0
    assert out.splitlines()[-1] == "=====UNSATISFIABLE====="


def test_all_solutions(capsys, tmp_path):
    p = write(tmp_path, 'var string(2) of {"a","b"}: x;\nconstraint str_len(x) = 2;\n')
    code, out, _ = run(capsys, p, "-a")
    sols, final = read_solutions(out)
    assert code == 0 and final == "=========="
    assert [s["x"] for s in sols] == ["aa", "ab", "ba", "bb"]


def test_stats(capsys):
    code, out, _ = run(capsys, PALINDROME, "-l", 15, "--stats")
    stats = dict(line[len("%%%mzn-stat: "):].split("=", 1) for line in out.splitlines()
                 if line.startswith("%%%mzn-stat: "))
    assert {"nodes", "failures", "propagations", "peakDepth", "solveTime", "flatTime"} <= set(stats)
    assert stats["objective"] == "7"
    assert out.rstrip().endswith("%%%mzn-stat-end")


def test_data_file_and_output_file(capsys, tmp_path):
    m = write(tmp_path, 'int: L;\nvar string(L) of {"a"}: x;\nconstraint str_len(x) = L;\n')
    d = write(tmp_path, "L = 3;\n", "d.dzn")
    o = tmp_path / "out.txt"
    code, out, _ = run(capsys, m, "-d", d, "-o", o)
    assert code == 0 and out == ""
    assert read_solutions(o.read_text())[0] == [{"x": "aaa"}]


def test_flag_beats_environment(capsys, monkeypatch):
    monkeypatch.setenv("STRINGZINC_MAX_LEN", "9")
    _, out, _ = run(capsys, PALINDROME, "--flatten-only")
    assert "maximum length 9" in out
    _, out, _ = run(capsys, PALINDROME, "--flatten-only", "-l", 11)
    assert "maximum length 11" in out


@pytest.mark.parametrize("argv,msg", [
    (["-a"], "satisfaction"),
    (["--target", "str"], "flatten-only"),
    (["-l", "0"], "at least 1"),
    (["-t", "-1"], "negative"),
])
def test_usage_errors(capsys, argv, msg):
    with pytest.raises(SystemExit) as info:
        main([str(PALINDROME)] + argv)
    assert info.value.code != 0
    assert msg in capsys.readouterr().err


def test_io_and_parse_errors(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path / "missing.szn")
    assert code == 1 and "missing.szn" in err
    code, _, err = run(capsys, write(tmp_path, "var string(3): x\nconstraint"))
    assert code == 1 and "m.szn:2:1" in err
    code, _, err = run(capsys, write(tmp_path, "int: N;\nvar string(N): x;\n"))
    assert code == 1 and "unbound-parameter" in err


def test_time_limit_without_solution(tmp_path):
    src = ('var string(40) of {"a","b"}: x;\nvar string(40) of {"a","b"}: y;\n'
           'constraint str_len(x) = 40;\nconstraint x = str_rev(y);\nconstraint x != y;\n'
           'constraint str_gcc(x, ["a"], [13]);\nconstraint str_gcc(y, ["b"], [26]);\n')
    p = write(tmp_path, src)
    out = io.StringIO()
    execute(RunConfig(str(p), time_limit=0.05), out)
    assert out.getvalue().splitlines()[-1] in ("=====UNKNOWN=====", "=====UNSATISFIABLE=====")


def test_quote_round_trip():
    text = 'a"b\\c\nd\te'
    assert read_solutions(f"x = {quote(text)};\n----------\n")[0] == [{"x": text}]


def test_reader_rejects_garbage():
    with pytest.raises(ValueError):
        read_solutions("x = 3;\n")
    with pytest.raises(ValueError):
        read_solutions("hello\n----------\n")


def test_round_trip_on_oracle_suite(tmp_path):
    """The printed blocks decode back to exactly the enumerated solution sets."""
    for k, case in enumerate(generate_oracle_suite()):
        p = tmp_path / f"c{k}.szn"
        p.write_text(case.source)
        out = io.StringIO()
        execute(RunConfig(str(p), max_len=case.max_len, all_solutions=True), out)
        sols, final = read_solutions(out.getvalue())
        assert final == ("==========" if sols else "=====UNSATISFIABLE=====")
        assert {frozenset(s.items()) for s in sols} == case.solutions, case.name


def test_printed_values_reencode_to_solutions():
    for case in generate_oracle_suite(sigma_sizes=(2,), lengths=(2,)):
        m = parse_model(case.source)
        inst = flatten_int(m, case.max_len)
        text = inst.emit()
        for sol in list(case.solutions)[:5]:
            fixed = []
            for s in inst.strings:
                w = dict(sol)[s.name]
                fixed.append(f"int_eq({s.length}, {len(w)})")
                for i, c in enumerate(s.chars):
                    code = char_index(w[i]) if i < len(w) else 0
                    fixed.append(f"int_eq({c}, {code})" if isinstance(c, str) else "")
            for name in inst.ints:
                fixed.append(f"int_eq({name}, {dict(sol)[name]})")
            body, solve = text.rsplit("solve", 1)
            extra = "".join(f"constraint {f};\n" for f in fixed if f)
            assert Solver(body + extra + "solve" + solve).solve().status == "SATISFIED"


def test_console_script_module():
    out = subprocess.run([sys.executable, "-m", "stringzinc.cli", str(PALINDROME), "-l", "15"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and 'x = "abcdcba";' in out.stdout

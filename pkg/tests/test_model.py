import pytest

from stringzinc import char_index, char_of, parse_model, validate
from stringzinc.model import (
    CONSTRAINT_FORMS, STRING_FUNCTIONS, TABLE1, CharAt, CharDomainError, StrLen,
)
from stringzinc.parser import parse_data

FIG1 = """
int: N;
var string(N): x;
var string(500) of {"a", "b", "c"}: z;
var string: w;
"""


def ascii_table_index(c: str) -> int:
    """Oracle: 1-based position of ``c`` in the 128-symbol table."""
    return bytes(range(128)).decode("ascii").index(c) + 1


def test_char_index_examples():
    assert char_index("\x00") == 1
    assert char_index("a") == 98
    assert char_index("d") - char_index("a") == 3


def test_char_index_matches_table_oracle():
    for k in range(128):
        c = chr(k)
        assert char_index(c) == ascii_table_index(c)
        assert char_of(char_index(c)) == c


@pytest.mark.parametrize("bad", ["é", "ab", "", "\x80"])
def test_char_index_rejects_non_ascii(bad):
    with pytest.raises(CharDomainError):
        char_index(bad)


@pytest.mark.parametrize("k", [0, 129, -1])
def test_char_of_rejects_out_of_range(k):
    with pytest.raises(CharDomainError):
        char_of(k)


def test_fig1_with_data_is_valid():
    m = parse_model(FIG1).with_data(parse_data("N = 10;"))
    assert validate(m) == []


def test_fig1_without_data_reports_unbound_parameter():
    diags = validate(parse_model(FIG1))
    assert [d.kind for d in diags] == ["unbound-parameter"]
    assert diags[0].span is not None


def test_undeclared_name():
    m = parse_model("var string(2): x;\nconstraint x = w;\n")
    diags = validate(m)
    assert len(diags) == 1 and "w" in diags[0].message


def test_empty_model_is_invalid():
    assert [d.kind for d in validate(parse_model(""))] == ["empty-model"]


def test_validate_is_repeatable():
    m = parse_model(FIG1 + "constraint q = x;\n")
    assert validate(m) == validate(m)


@pytest.mark.parametrize("src,kind", [
    ('var string(2): x;\nconstraint str_dfa(x, 2, ["a"], [| 1 | 3 |], 1, {1});', "automaton"),
    ('var string(2): x;\nconstraint str_dfa(x, 2, ["a"], [| 1 | 1 |], 3, {1});', "automaton"),
    ('var string(2): x;\nconstraint str_gcc(x, ["a", "a"], [1, 1]);', "gcc"),
    ('var string(-1): x;', "bound"),
    ('var string(2) of {"ab"}: x;', "type"),
    ('var string(2) of {}: x;', "alphabet"),
    ('var 3..1: n;', "domain"),
    ('var string(2): x;\nvar string(2): x;', "duplicate"),
])
def test_invalid_models(src, kind):
    kinds = [d.kind for d in validate(parse_model(src))]
    assert kind in kinds


def test_every_table_row_has_one_variant():
    variants = set(CONSTRAINT_FORMS) | set(STRING_FUNCTIONS) | {CharAt, StrLen}
    assert set(TABLE1.values()) == variants
    # the six comparisons share one node type, every other row has its own
    counts = {}
    for v in TABLE1.values():
        counts[v] = counts.get(v, 0) + 1
    assert sorted(counts.values()) == [1] * (len(variants) - 1) + [6]

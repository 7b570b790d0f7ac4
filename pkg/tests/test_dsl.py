import pytest

from noether2.dsl import corpus_names, load_corpus, parse, parse_expr, print_problem
from noether2.errors import ConstraintNotLinear, ParseError, UndeclaredIdentifier
from noether2.operators import DIFFERENCE

HEAD = "name: t\nkind: continuous\nvars: x t\nfields: u\narbitrary: g1 g2\n"


def test_corpus_has_six_problems():
    assert corpus_names() == [
        "area_preserving",
        "lattice_kdv",
        "mkg_continuous",
        "mkg_discrete",
        "shallow_water",
        "wave",
    ]


def test_wave_file_structure():
    p = load_corpus("wave")
    assert p.axes == ["x", "t"] and p.fields == ["u"]
    assert len(p.constraints) == 2 and sorted(p.multipliers) == [1, 2]
    assert p.multipliers[1] == parse_expr("u_x - u_t", p)


@pytest.mark.parametrize("name", corpus_names())
def test_print_parse_round_trip(name):
    p = load_corpus(name)
    q = parse(print_problem(p))
    assert q == p
    assert print_problem(q) == print_problem(p)


def test_empty_constraint_section_is_unconstrained():
    p = parse(HEAD + "lagrangian: u_x^2\nconstraint:\ncharacteristic u: g1\n")
    assert p.constraints == []


def test_continuation_lines_and_comments():
    p = parse(HEAD + "lagrangian: u_x^2  # kinetic\n    - u_t^2\n")
    assert p.lagrangian == parse_expr("u_x^2 - u_t^2", p)


def test_discrete_offsets_and_conjugate_pairs():
    p = parse("kind: discrete\nvars: n m\nfields: psi~psic\nlagrangian: psi[1,0]*conj(psi)\n")
    assert p.kind == DIFFERENCE and p.partners == {"psi": "psic"}
    assert p.lagrangian == parse_expr("psi[1,0]*psic", p)


def test_let_abbreviations_take_indices():
    p = parse(HEAD + "let w: u*u_x\nlagrangian: w_t\n")
    assert p.lagrangian == parse_expr("u_t*u_x + u*u_{xt}", p)


def _error(text):
    with pytest.raises(ParseError) as info:
        parse(text)
    return info.value


def test_malformed_subscript_position():
    err = _error(HEAD + "lagrangian: u_{ + 1\n")
    assert (err.line, err.column) == (6, 17)  # the "+" after the brace
    err = _error(HEAD + "lagrangian: u_{\n")
    assert err.line == 6 and err.column == 16


def test_undeclared_identifier_position():
    err = _error(HEAD + "lagrangian: u_x*w\n")
    assert isinstance(err, UndeclaredIdentifier)
    assert (err.line, err.column) == (6, 17)


def test_nonlinear_constraint_rejected():
    err = _error(HEAD + "constraint: g1*g2_x = 0\n")
    assert isinstance(err, ConstraintNotLinear)
    assert err.line == 6


def test_implicit_multiplication_rejected():
    err = _error(HEAD + "lagrangian: 2 u_x\n")
    assert "implicit multiplication" in str(err)
    assert (err.line, err.column) == (6, 15)


def test_bad_axis_subscript():
    err = _error(HEAD + "lagrangian: u_y\n")
    assert "axis" in str(err)


def test_unknown_section_and_bad_kind():
    assert "unknown section" in str(_error(HEAD + "lagrange: u\n"))
    assert "unknown kind" in str(_error("kind: fuzzy\n"))


def test_duplicate_and_reserved_names():
    assert "duplicate" in str(_error("vars: x x\n"))
    assert "invalid name" in str(_error("vars: x\nfields: exp\n"))

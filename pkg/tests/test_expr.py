import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ultraconv.errors import DomainError, ParseError
from ultraconv.expr import ATOMS, Add, Atom, Mul, ReflectE, Scale, function, parse_expr, to_text
from ultraconv.functions import Gaussian


def test_single_atom():
    assert parse_expr("gaussian(0,1)") == Atom("gaussian", (0.0, 1.0))


def test_scaled_sum():
    e = parse_expr("0.5*gaussian(0,1)+expdecay(1)")
    assert e == Add((Scale(0.5, Atom("gaussian", (0.0, 1.0))), Atom("expdecay", (1.0,))))
    f = function("0.5*gaussian(0,1)+expdecay(1)")
    x = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(f(x), 0.5 * np.exp(-x * x) + np.exp(-np.abs(x)), rtol=1e-15)


def test_precedence_and_reflect():
    e = parse_expr("cos(2)*reflect(gaussian(1,1)) + delta(0,1)")
    assert e == Add((Mul((Atom("cos", (2.0,)), ReflectE(Atom("gaussian", (1.0, 1.0))))), Atom("delta", (0.0, 1.0))))
    f = function("reflect(gaussian(1,1))")
    assert f(np.array([-1.0]))[0] == 1.0


def test_whitespace_and_signs():
    assert parse_expr(" -2.5e-1 * gaussian( -1 , .5 ) ") == Scale(-0.25, Atom("gaussian", (-1.0, 0.5)))


@pytest.mark.parametrize("text,code,line,col", [
    ("gauss(0,1)", "unknown-atom", 1, 1),
    ("gaussian(0,1)+\n  foo(1)", "unknown-atom", 2, 3),
    ("gaussian(0)", "arity", 1, 1),
    ("weier(0.5,3,1)", "arity", 1, 1),
    ("gaussian(0,1.2.3)", "numeral", 1, 12),
    ("gaussian(1e,1)", "numeral", 1, 10),
    ("hermite(1.5,1)", "numeral", 1, 9),
    ("gaussian(0,1", "syntax", 1, 13),
    ("gaussian(0,1))", "syntax", 1, 14),
    ("2", "syntax", 1, 1),
    ("gaussian(0,1) $", "syntax", 1, 15),
])
def test_errors(text, code, line, col):
    with pytest.raises(ParseError) as ei:
        parse_expr(text)
    assert (ei.value.code, ei.value.line, ei.value.column) == (code, line, col)


def test_error_codes_distinct_and_expected_set():
    with pytest.raises(ParseError) as ei:
        parse_expr("gauss(0,1)")
    assert "gaussian" in ei.value.expected
    with pytest.raises(ParseError) as ej:
        parse_expr("gaussian(0,1")
    assert ")" in ej.value.expected


def test_domain_checked_at_build():
    parse_expr("gaussian(0,-1)")
    with pytest.raises(DomainError):
        function("gaussian(0,-1)")


def test_descriptor_matches_class():
    f = function("gaussian(0.3,2)")
    x = np.linspace(-3, 3, 7)
    assert np.array_equal(f(x), Gaussian(0.3, 2.0)(x))


_num = st.floats(-1e3, 1e3, allow_nan=False).map(lambda v: float(np.float64(v)))


def _atoms():
    def make(name):
        params, ints = ATOMS[name]
        args = [st.integers(0, 9) if i in ints else _num for i in range(len(params))]
        return st.tuples(*args).map(lambda a: Atom(name, tuple(a)))
    return st.one_of([make(n) for n in ATOMS])


_trees = st.recursive(
    _atoms(),
    lambda kids: st.one_of(
        st.lists(kids, min_size=2, max_size=3).map(lambda t: Add(tuple(t))),
        st.lists(kids, min_size=2, max_size=3).map(lambda t: Mul(tuple(t))),
        st.tuples(_num, kids).map(lambda p: Scale(*p)),
        kids.map(ReflectE),
    ),
    max_leaves=8,
)


@settings(max_examples=200, deadline=None)
@given(_trees)
def test_print_parse_round_trip(tree):
    text = to_text(tree)
    assert parse_expr(text) == tree
    assert to_text(parse_expr(text)) == text

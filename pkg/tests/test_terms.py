import pytest
from hypothesis import given, settings, strategies as st

from drsolve.terms import (And, Atom, Cyl, EqualityError, Exists, FNot, Forall, Implies, Join,
                           Meet, Not, ONE, Or, ParseError, Var, ZERO, effective_dim,
                           formula_to_term, parse_formula, parse_term, render)

x, y = Var("x"), Var("y")


@pytest.mark.parametrize("text, expected", [
    ("c0 (x * -y) + 1", Join(Cyl(0, Meet(x, Not(y))), ONE)),
    ("x * -x", Meet(x, Not(x))),
    ("x + y * x", Join(x, Meet(y, x))),
    ("x & y | x", Join(Meet(x, y), x)),
    ("~c1 c0 x", Not(Cyl(1, Cyl(0, x)))),
    ("0 + 1", Join(ZERO, ONE)),
    ("c12 x", Cyl(12, x)),
])
def test_parse_examples(text, expected):
    assert parse_term(text) is expected


def test_hash_consing_shares_nodes():
    assert parse_term("x * y") is Meet(Var("x"), Var("y"))
    assert Cyl(0, x) is not Cyl(1, x)


@pytest.mark.parametrize("text", ["c0 (x *", "(x", "x)", "x +", "", "c0", "x y"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_term(text)


def test_unbalanced_message():
    with pytest.raises(ParseError, match="unbalanced parenthesis"):
        parse_term("c0 (x *")


@pytest.mark.parametrize("term, text", [
    (Meet(x, ONE), "x * 1"),
    (Cyl(2, x), "c2 x"),
    (Join(Meet(x, y), x), "x * y + x"),
    (Meet(Join(x, y), x), "(x + y) * x"),
    (Join(x, Join(y, x)), "x + (y + x)"),
    (Not(Meet(x, y)), "-(x * y)"),
])
def test_render(term, text):
    assert render(term) == text


def test_term_metrics():
    t = parse_term("c0 (x * c1 y) + c3 x")
    assert t.depth == 2
    assert t.max_index == 3
    assert t.vars == frozenset({"x", "y"})
    assert effective_dim(t) == 4
    assert effective_dim(x) == 2


def test_terms_are_immutable():
    with pytest.raises(AttributeError):
        x.name = "z"


@pytest.mark.parametrize("name", ["c0", "c12x"])
def test_variable_names_cannot_look_like_cylindrifications(name):
    with pytest.raises(ValueError):
        Var(name)


@pytest.mark.parametrize("text, expected", [
    ("exists v0. R(v0,v1)", Exists(0, Atom("R", (0, 1)))),
    ("R(v0,v1) & ~R(v0,v1)", And(Atom("R", (0, 1)), FNot(Atom("R", (0, 1))))),
    ("forall v1. P(v1) -> P(v0)", Implies(Forall(1, Atom("P", (1,))), Atom("P", (0,)))),
    ("P(v0) | P(v1) & P(v2)", Or(Atom("P", (0,)), And(Atom("P", (1,)), Atom("P", (2,))))),
    ("P(v0) -> P(v1) -> P(v2)", Implies(Atom("P", (0,)), Implies(Atom("P", (1,)), Atom("P", (2,))))),
])
def test_parse_formula(text, expected):
    assert parse_formula(text) == expected


def test_equality_is_rejected():
    with pytest.raises(EqualityError, match="identity is not a logical symbol"):
        parse_formula("v0 = v1")


def test_iff_is_two_implications():
    f = parse_formula("P(v0) <-> P(v1)")
    a, b = Atom("P", (0,)), Atom("P", (1,))
    assert f == And(Implies(a, b), Implies(b, a))


def test_formula_to_term():
    r = Var("R@0,1")
    assert formula_to_term(Exists(0, Atom("R", (0, 1)))) is Cyl(0, r)
    assert formula_to_term(Forall(1, Atom("R", (0, 1)))) is Not(Cyl(1, Not(r)))
    assert formula_to_term(parse_formula("P(v0) -> P(v1)")) is Join(Not(Var("P@0")), Var("P@1"))


# ---------------------------------------------------------------- round trips

leaf = st.sampled_from([ZERO, ONE, Var("x"), Var("y"), Var("z_1"), Var("R@0,1")])
terms = st.recursive(
    leaf,
    lambda sub: st.one_of(
        sub.map(Not),
        st.tuples(st.integers(0, 11), sub).map(lambda p: Cyl(*p)),
        st.tuples(sub, sub).map(lambda p: Meet(*p)),
        st.tuples(sub, sub).map(lambda p: Join(*p)),
    ),
    max_leaves=12,
)

atoms = st.builds(Atom, st.sampled_from(["R", "P", "Q2"]),
                  st.lists(st.integers(0, 3), min_size=1, max_size=3).map(tuple))
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(
        sub.map(FNot),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Implies, sub, sub),
        st.builds(Exists, st.integers(0, 3), sub),
        st.builds(Forall, st.integers(0, 3), sub),
    ),
    max_leaves=8,
)


@settings(max_examples=1000, deadline=None)
@given(terms)
def test_term_round_trip(t):
    assert parse_term(render(t)) is t


@settings(max_examples=1000, deadline=None)
@given(formulas)
def test_formula_round_trip(f):
    assert parse_formula(render(f)) == f

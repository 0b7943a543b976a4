import random

import pytest

from drsolve.decision import decide_sat, decide_valid
from drsolve.models import Unit, evaluate
from drsolve.oracle import (GamModel, canonical_corpus, check_axioms, enumerate_units, gam_coherent,
                            gam_eval, gam_unit, oracle_sat, random_closed_term, random_formula,
                            random_gam_model, random_term, random_unit)
from drsolve.terms import formula_to_term, parse_formula, parse_term


def test_unit_counts():
    assert len(list(enumerate_units(2, 2))) == 16
    assert len(list(enumerate_units(1, 3))) == 1
    assert len(list(enumerate_units(3, 2, 5, up_to_iso=True))) == 85
    with pytest.raises(ValueError):
        list(enumerate_units(5, 2))


def test_small_units_satisfy_axioms():
    for u in enumerate_units(2, 2):
        assert check_axioms(u) == []


def test_random_units_satisfy_axioms():
    rng = random.Random(2)
    for _ in range(20):
        assert check_axioms(random_unit(rng, 4, rng.choice([2, 3])), seed=1) == []


def test_mutated_cylindrification_is_caught():
    def broken(unit, i, mask):
        # drops the point itself from its own class
        out = unit.cyl(i, mask)
        return out & ~mask if mask != unit.full else out

    u = Unit([("a", "b"), ("a", "c")], 2)
    failures = check_axioms(u, cyl=broken)
    assert failures
    assert {f["axiom"] for f in failures} >= {"x <= c_i x"}


def test_oracle_examples():
    found = oracle_sat(parse_term("c0 c1 x * -c1 c0 x"))
    assert found is not None and len(found.unit.points) == 3
    assert found.point in evaluate(found.unit, parse_term("c0 c1 x * -c1 c0 x"), found.ev)
    assert oracle_sat(parse_term("x * -c0 x")) is None


def test_oracle_is_seeded():
    t = parse_term("c0 x * c1 -x * c0 c1 x")
    a = oracle_sat(t, 3, 5, seed=4)
    b = oracle_sat(t, 3, 5, seed=4)
    assert (a.unit.points, a.ev, a.point) == (b.unit.points, b.ev, b.point)


def test_generators_are_deterministic():
    def draw(seed):
        rng = random.Random(seed)
        return ([random_term(rng, ("x", "y")) for _ in range(5)],
                [random_closed_term(rng) for _ in range(5)],
                [random_formula(rng) for _ in range(5)])
    assert draw(9) == draw(9)


def test_canonical_corpus():
    corpus = canonical_corpus()
    assert len(corpus) == len(set(corpus)) >= 300
    assert all(t.vars <= {"x"} and t.depth <= 2 and t.size <= 7 for t in corpus)


MODEL = GamModel(domain=("a", "b"), relations={"R": [("a", "b")], "P": [("b",)]},
                 assignments=(("a", "b"), ("a", "a"), ("b", "b")))


def test_gam_eval():
    f = parse_formula("exists v1. R(v0,v1)")
    assert gam_eval(MODEL, f, ("a", "a"))
    assert not gam_eval(MODEL, f, ("b", "b"))
    g = parse_formula("forall v0. P(v1)")
    assert gam_eval(MODEL, g, ("b", "b")) and not gam_eval(MODEL, g, ("a", "a"))
    with pytest.raises(ValueError):
        gam_eval(MODEL, parse_formula("P(v2)"), ("a", "a"))


def test_gam_unit_names_atoms_by_tuple():
    unit, ev = gam_unit(MODEL, parse_formula("R(v0,v1) & R(v1,v0)"))
    assert set(ev) == {"R@0,1", "R@1,0"}
    assert ev["R@0,1"] == {("a", "b")} and ev["R@1,0"] == frozenset()


def test_gam_json_round_trip():
    again = GamModel.from_json(MODEL.to_json())
    assert again.to_json() == MODEL.to_json()
    with pytest.raises(ValueError):
        GamModel(domain=("a",), relations={}, assignments=())


def test_gam_coherence():
    rng = random.Random(1)
    for _ in range(60):
        model = random_gam_model(rng)
        assert gam_coherent(model, random_formula(rng))


def test_quantifiers_do_not_commute():
    f = parse_formula("(exists v0. exists v1. R(v0,v1)) <-> (exists v1. exists v0. R(v0,v1))")
    assert decide_valid(formula_to_term(f)).kind == "INVALID"
    diff = parse_formula("(exists v0. exists v1. R(v0,v1)) & ~(exists v1. exists v0. R(v0,v1))")
    t = formula_to_term(diff)
    assert decide_sat(t).kind == "SAT"
    assert oracle_sat(t) is not None

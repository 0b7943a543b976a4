import random

import pytest

from drsolve.forms import (degree0_form, enumerate_forms, form_to_term, intern_form,
                           is_consistent, projection)
from drsolve.models import (ModelError, Unit, bridge, build_witness, evaluate, extend_plus,
                            point_form, product_unit, witness_to_dot, witness_to_json, zigzag)
from drsolve.oracle import random_unit
from drsolve.terms import Cyl, Meet, Not, ZERO, Var, parse_term

x = Var("x")
X = {"x"}
pos = degree0_form({"x"}, X)
neg = degree0_form(set(), X)
TAU = intern_form({"x"}, [{pos, neg}, {pos}])
CONSISTENT = [f for f in enumerate_forms(X, 2, 1) if is_consistent(f)]


def degree2_form():
    return point_form(build_witness(TAU), build_witness(TAU).root, 2)


def test_unit_classes():
    u = Unit([("a", "b"), ("a", "b2"), ("a2", "b2")], 2)
    assert u.neighbours(0, ("a", "b2")) == {("a", "b2"), ("a2", "b2")}
    assert u.neighbours(1, ("a", "b2")) == {("a", "b"), ("a", "b2")}
    with pytest.raises(ModelError):
        Unit([("a",)], 2)
    with pytest.raises(ModelError):
        Unit([], 2)


def test_singleton_evaluation():
    u = Unit([("v0", "v1")], 2)
    full = frozenset(u.points)
    assert evaluate(u, Cyl(0, x), {"x": full}) == full
    assert evaluate(u, Cyl(1, ZERO), {"x": full}) == frozenset()


def test_cylindrifications_do_not_commute():
    u = Unit([("a", "b"), ("a", "b2"), ("a2", "b2")], 2)
    ev = {"x": {("a2", "b2")}}
    assert ("a", "b") in evaluate(u, parse_term("c1 c0 x"), ev)
    assert ("a", "b") not in evaluate(u, parse_term("c0 c1 x"), ev)


def test_unknown_variable():
    u = Unit([("a", "b")], 2)
    with pytest.raises(KeyError):
        evaluate(u, Var("y"), {"x": set()})


def test_frame_law_and_closure():
    rng = random.Random(3)
    for _ in range(30):
        u = random_unit(rng, 4, 3)
        for i in range(u.n):
            for j in range(u.n):
                if i != j:
                    for p in u.points:
                        assert u.neighbours(i, p) & u.neighbours(j, p) == {p}
            assert u.cyl(i, u.full) == u.full
            a = rng.getrandbits(len(u.points))
            assert u.cyl(i, u.cyl(i, a)) == u.cyl(i, a)


def test_point_form_singleton():
    m = build_witness(pos)
    assert point_form(m, m.root, 0) is pos
    assert point_form(m, m.root, 1) is intern_form({"x"}, [{pos}, {pos}])


def test_degree0_witness():
    m = build_witness(pos)
    assert len(m.points) == 1 and len(m.base) == 2


def test_literal_witness():
    m = build_witness(TAU)
    assert len(m.points) == 4 and len(m.base) == 5
    assert m.satisfies(m.root, form_to_term(TAU))


@pytest.mark.parametrize("form", CONSISTENT, ids=lambda f: f"form{f.uid}")
def test_witness_of_each_consistent_form(form):
    m = build_witness(form)
    assert m.satisfies(m.root, form_to_term(form))
    assert point_form(m, m.root, 1) is form
    assert len(m.base) == 2 + len(form.subs[0]) + len(form.subs[1])
    for p, tag in m.tags.items():
        assert m.satisfies(p, form_to_term(tag))


def test_inconsistent_form_rejected():
    with pytest.raises(ModelError):
        build_witness(intern_form({"x"}, [{neg}, {pos}]))


def test_degree2_witness_tags():
    f = degree2_form()
    assert f.degree == 2 and is_consistent(f)
    m = build_witness(f)
    assert point_form(m, m.root, 2) is f
    for p, tag in m.tags.items():
        assert m.satisfies(p, form_to_term(tag))
        assert is_consistent(point_form(m, p, 1))


def test_zigzag():
    m = build_witness(pos)
    assert zigzag(m) == [m.root]
    m = build_witness(degree2_form())
    path = zigzag(m)
    assert len(path) == 3 and path[-1] == m.root
    assert [m.tags[p].degree for p in path] == [0, 1, 2]
    assert path[1] in m.unit.neighbours(0, path[2])
    assert path[0] in m.unit.neighbours(1, path[1])
    for p in path:
        assert m.satisfies(p, form_to_term(m.tags[p]))
    with pytest.raises(ModelError):
        zigzag(build_witness(TAU))


def test_extend_plus():
    m = build_witness(pos)
    e = extend_plus(m, neg)
    assert e.points == (("v0", "v1"), ("z", "v1"))
    assert e.ev["x"] == {("v0", "v1")}
    assert point_form(e, e.root, 1) is not point_form(m, m.root, 1)
    with pytest.raises(ModelError):
        extend_plus(m, pos)


def test_extend_plus_keeps_tags():
    m = build_witness(degree2_form())
    bottom = zigzag(m)[0]
    other = neg if projection(m.tags[bottom], 0) is pos else pos
    e = extend_plus(m, other)
    for p, tag in m.tags.items():
        assert e.satisfies(p, form_to_term(tag))


def test_bridge_singletons():
    w = bridge(build_witness(pos), build_witness(neg))
    assert w.points == (("x.v0", "x.v1"), ("y.v0", "y.v1"), ("y.v0", "x.v1"))
    assert ("y.v0", "x.v1") in w.ev["x"]
    assert len(w.marks["bridge"]) == 1
    assert w.satisfies(w.marks["sigma_root"], Meet(Not(x), Cyl(1, Cyl(0, x))))


def test_bridge_keeps_tags():
    wt = build_witness(degree2_form())
    ws = build_witness(pos)
    for safe in (False, True):
        w = bridge(wt, ws, safe=safe)
        for p, tag in wt.tags.items():
            q = tuple("x." + c for c in p)
            assert w.satisfies(q, form_to_term(tag))


def test_product_unit():
    u1 = Unit([("a", "b")], 2)
    u2 = Unit([("c", "d")], 2)
    union, iso = product_unit(u1, u2)
    assert len(union.points) == 2
    assert iso.psi({("a", "b")}, set()) == {("a", "b")}
    assert iso.psi(set(), set()) == frozenset()
    assert iso.check(100, seed=1) == []
    with pytest.raises(ModelError):
        product_unit(u1, u1)


def test_export():
    m = build_witness(TAU)
    doc = witness_to_json(m)
    assert doc["n"] == 2 and doc["tail"] == "t"
    assert len(doc["points"]) == 4 and doc["root"] == "p0"
    assert doc["ev"]["x"][0] == "p0"
    assert all("tagFormId" in p for p in doc["points"])
    dot = witness_to_dot(m)
    assert dot.startswith("graph witness {") and dot.rstrip().endswith("}")

"""Brute-force reference semantics: small units, exhaustive or seeded
evaluation search, axiom checks, and first-order models over assignment sets.
"""

from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass, field

from .models import Unit, evaluate_mask
from .terms import (And, Atom, Cyl, Exists, FNot, Forall, Implies, Join, Meet, Not, Or,
                    Term, Var, ONE, ZERO, atom_name, formula_to_term)

__all__ = [
    "enumerate_units", "oracle_sat", "OracleModel", "check_axioms", "AXIOMS",
    "GamModel", "gam_eval", "gam_unit", "default_seed",
    "random_unit", "random_term", "random_closed_term", "random_gam_model", "random_formula",
    "canonical_corpus", "gam_coherent",
]

EXHAUSTIVE_BITS = 12
SAMPLES = 4096


def default_seed() -> int:
    return int(os.environ.get("DRSOLVE_SEED", "0"))


def _base(size):
    return [f"a{k}" for k in range(size)]


def _canonical(points, size, n):
    """Smallest relabelling of the point set under permutations of the base."""
    best = None
    for perm in itertools.permutations(range(size)):
        img = tuple(sorted(tuple(perm[c] for c in p) for p in points))
        if best is None or img < best:
            best = img
    return best


def enumerate_units(max_base: int, n: int, max_v: int | None = None, up_to_iso=False):
    """All nonempty V within (base)^n for base sizes 1..max_base."""
    if not 1 <= max_base <= 4:
        raise ValueError("max_base must be between 1 and 4")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    for size in range(1, max_base + 1):
        names = _base(size)
        cube = list(itertools.product(range(size), repeat=n))
        top = len(cube) if max_v is None else min(max_v, len(cube))
        seen = set()
        for k in range(1, top + 1):
            for pts in itertools.combinations(cube, k):
                if up_to_iso:
                    key = _canonical(pts, size, n)
                    if key in seen:
                        continue
                    seen.add(key)
                yield Unit([tuple(names[c] for c in p) for p in pts], n)


_UNIT_CACHE: dict = {}


def _units(max_base, n, max_v):
    key = (max_base, n, max_v)
    if key not in _UNIT_CACHE:
        _UNIT_CACHE[key] = list(enumerate_units(max_base, n, max_v, up_to_iso=True))
    return _UNIT_CACHE[key]


@dataclass
class OracleModel:
    unit: Unit
    ev: dict
    point: tuple


def _compile(t: Term):
    """Post-order op list over slot indices."""
    slots = {}
    ops = []

    def visit(node):
        if node in slots:
            return slots[node]
        kids = [visit(c) for c in node.children()]
        if isinstance(node, Var):
            op = ("var", node.name)
        elif node is ZERO:
            op = ("zero",)
        elif node is ONE:
            op = ("one",)
        elif isinstance(node, Not):
            op = ("not", kids[0])
        elif isinstance(node, Meet):
            op = ("and", kids[0], kids[1])
        elif isinstance(node, Join):
            op = ("or", kids[0], kids[1])
        elif isinstance(node, Cyl):
            op = ("cyl", node.index, kids[0])
        else:
            raise TypeError(f"not a term: {node!r}")
        slots[node] = len(ops)
        ops.append(op)
        return slots[node]
    visit(t)
    return ops


def _run(ops, unit, ev):
    vals = []
    full = unit.full
    for op in ops:
        tag = op[0]
        if tag == "var":
            v = ev[op[1]]
        elif tag == "and":
            v = vals[op[1]] & vals[op[2]]
        elif tag == "or":
            v = vals[op[1]] | vals[op[2]]
        elif tag == "not":
            v = full & ~vals[op[1]]
        elif tag == "cyl":
            v = unit.cyl(op[1], vals[op[2]])
        elif tag == "zero":
            v = 0
        else:
            v = full
        vals.append(v)
    return vals[-1]


def oracle_sat(t: Term, max_base: int = 3, max_v: int = 5, n: int | None = None,
               seed: int | None = None):
    """Search small units for a point in t; None when nothing is found."""
    n = max(2, t.max_index + 1) if n is None else n
    variables = sorted(t.vars)
    ops = _compile(t)
    rng = random.Random(default_seed() if seed is None else seed)
    for unit in _units(max_base, n, max_v):
        size = len(unit.points)
        bits = size * len(variables)
        if bits <= EXHAUSTIVE_BITS:
            candidates = range(1 << bits)
        else:
            candidates = (rng.getrandbits(bits) for _ in range(SAMPLES))
        mask = (1 << size) - 1
        for code in candidates:
            ev = {x: (code >> (k * size)) & mask for k, x in enumerate(variables)}
            hit = _run(ops, unit, ev)
            if hit:
                low = (hit & -hit).bit_length() - 1
                return OracleModel(unit, {x: unit.decode(m) for x, m in ev.items()},
                                   unit.points[low])
    return None


# ---------------------------------------------------------------- axioms

def _ax_zero(unit, cyl, i, x, y):
    return cyl(unit, i, 0) == 0


def _ax_extensive(unit, cyl, i, x, y):
    return x & ~cyl(unit, i, x) == 0


def _ax_meet(unit, cyl, i, x, y):
    return cyl(unit, i, x & cyl(unit, i, y)) == cyl(unit, i, x) & cyl(unit, i, y)


AXIOMS = {"c_i 0 = 0": _ax_zero, "x <= c_i x": _ax_extensive,
          "c_i(x c_i y) = c_i x c_i y": _ax_meet}


def _default_cyl(unit, i, mask):
    return unit.cyl(i, mask)


def check_axioms(unit: Unit, samples: int = 200, seed: int | None = None, cyl=None) -> list:
    """Failures of the axioms on ``unit``; exhaustive over pairs of subsets
    when |V| <= 4, otherwise ``samples`` seeded pairs."""
    cyl = cyl or _default_cyl
    size = len(unit.points)
    if size <= 4:
        pairs = itertools.product(range(1 << size), repeat=2)
    else:
        rng = random.Random(default_seed() if seed is None else seed)
        pairs = [(rng.getrandbits(size), rng.getrandbits(size)) for _ in range(samples)]
    failures = []
    for x, y in pairs:
        for i in range(unit.n):
            for name, ax in AXIOMS.items():
                if not ax(unit, cyl, i, x, y):
                    failures.append({"axiom": name, "index": i, "x": x, "y": y})
    return failures


# ---------------------------------------------------------------- GAM

@dataclass
class GamModel:
    """A first-order structure whose quantifiers range over a chosen set of
    assignments rather than all of them."""
    domain: tuple
    relations: dict
    assignments: tuple
    n: int = field(default=2)

    def __post_init__(self):
        self.assignments = tuple(dict.fromkeys(tuple(s) for s in self.assignments))
        self.relations = {r: frozenset(tuple(x) for x in rows) for r, rows in self.relations.items()}
        dom = set(self.domain)
        for s in self.assignments:
            if len(s) != self.n or not set(s) <= dom:
                raise ValueError(f"bad assignment {s!r}")
        if not self.assignments:
            raise ValueError("the assignment set must be nonempty")

    @classmethod
    def from_json(cls, doc):
        return cls(domain=tuple(doc["domain"]),
                   relations={r: [tuple(x) for x in rows] for r, rows in doc["relations"].items()},
                   assignments=tuple(tuple(s) for s in doc["assignments"]),
                   n=int(doc.get("n", len(doc["assignments"][0]) if doc["assignments"] else 2)))

    def to_json(self):
        return {"n": self.n, "domain": list(self.domain),
                "relations": {r: sorted(list(x) for x in rows)
                              for r, rows in sorted(self.relations.items())},
                "assignments": [list(s) for s in self.assignments]}


def gam_eval(model: GamModel, f, s) -> bool:
    s = tuple(s)
    if isinstance(f, Atom):
        if max(f.args) >= model.n:
            raise ValueError(f"atom {f.relation}{f.args} uses a variable beyond v{model.n - 1}")
        rows = model.relations.get(f.relation, frozenset())
        return tuple(s[i] for i in f.args) in rows
    if isinstance(f, FNot):
        return not gam_eval(model, f.arg, s)
    if isinstance(f, And):
        return gam_eval(model, f.left, s) and gam_eval(model, f.right, s)
    if isinstance(f, Or):
        return gam_eval(model, f.left, s) or gam_eval(model, f.right, s)
    if isinstance(f, Implies):
        return (not gam_eval(model, f.left, s)) or gam_eval(model, f.right, s)
    if isinstance(f, (Exists, Forall)):
        i = f.index
        if i >= model.n:
            near = [s]
        else:
            near = [r for r in model.assignments
                    if all(r[k] == s[k] for k in range(model.n) if k != i)]
        if isinstance(f, Exists):
            return any(gam_eval(model, f.body, r) for r in near)
        return all(gam_eval(model, f.body, r) for r in near)
    raise TypeError(f"not a formula: {f!r}")


def _atoms(f, out):
    if isinstance(f, Atom):
        out.add((f.relation, f.args))
    else:
        for part in ("arg", "body", "left", "right"):
            sub = getattr(f, part, None)
            if sub is not None:
                _atoms(sub, out)
    return out


def gam_unit(model: GamModel, f):
    """The unit of assignments and the evaluation of the atoms of ``f``."""
    unit = Unit(model.assignments, model.n)
    ev = {}
    for rel, args in sorted(_atoms(f, set())):
        rows = model.relations.get(rel, frozenset())
        ev[atom_name(rel, args)] = frozenset(
            s for s in model.assignments if tuple(s[i] for i in args) in rows)
    return unit, ev


def gam_coherent(model: GamModel, f) -> bool:
    unit, ev = gam_unit(model, f)
    masks = {x: unit.mask(ps) for x, ps in ev.items()}
    got = unit.decode(evaluate_mask(unit, masks, formula_to_term(f)))
    return all((s in got) == gam_eval(model, f, s) for s in model.assignments)


# ---------------------------------------------------------------- generators

def random_unit(rng: random.Random, max_base: int = 4, n: int = 2) -> Unit:
    size = rng.randint(1, max_base)
    names = _base(size)
    cube = list(itertools.product(names, repeat=n))
    k = rng.randint(1, len(cube))
    return Unit(rng.sample(cube, k), n)


def random_term(rng: random.Random, variables=("x",), n: int = 2, depth: int = 2,
                size: int = 8) -> Term:
    def gen(budget, d):
        if budget <= 1:
            r = rng.random()
            if r < 0.08:
                return ZERO
            if r < 0.16:
                return ONE
            return Var(rng.choice(variables))
        kinds = ["not", "and", "or"] + (["cyl", "cyl"] if d > 0 else [])
        kind = rng.choice(kinds)
        if kind == "not":
            return Not(gen(budget - 1, d))
        if kind == "cyl":
            return Cyl(rng.randrange(n), gen(budget - 1, d - 1))
        left = rng.randint(1, budget - 2) if budget > 2 else 1
        a = gen(left, d)
        b = gen(max(1, budget - 1 - left), d)
        return Meet(a, b) if kind == "and" else Join(a, b)
    return gen(rng.randint(1, size), depth)


def random_closed_term(rng: random.Random, n: int = 2, depth: int = 3, size: int = 10) -> Term:
    def gen(budget, d):
        if budget <= 1:
            return rng.choice((ZERO, ONE))
        kind = rng.choice(["not", "and", "or"] + (["cyl"] if d > 0 else []))
        if kind == "not":
            return Not(gen(budget - 1, d))
        if kind == "cyl":
            return Cyl(rng.randrange(n + 1), gen(budget - 1, d - 1))
        left = rng.randint(1, max(1, budget - 2))
        a = gen(left, d)
        b = gen(max(1, budget - 1 - left), d)
        return Meet(a, b) if kind == "and" else Join(a, b)
    return gen(rng.randint(1, size), depth)


def random_gam_model(rng: random.Random, n: int = 2, relations=(("R", 2), ("P", 1)),
                     max_domain: int = 3) -> GamModel:
    domain = tuple(_base(rng.randint(1, max_domain)))
    rels = {}
    for name, arity in relations:
        rows = list(itertools.product(domain, repeat=arity))
        rels[name] = [r for r in rows if rng.random() < 0.5]
    cube = list(itertools.product(domain, repeat=n))
    assignments = rng.sample(cube, rng.randint(1, len(cube)))
    return GamModel(domain, rels, tuple(assignments), n)


def random_formula(rng: random.Random, n: int = 2, relations=(("R", 2), ("P", 1)),
                   size: int = 8):
    def gen(budget):
        if budget <= 1:
            name, arity = rng.choice(relations)
            return Atom(name, tuple(rng.randrange(n) for _ in range(arity)))
        kind = rng.choice(["not", "and", "or", "imp", "ex", "all"])
        if kind == "not":
            return FNot(gen(budget - 1))
        if kind in ("ex", "all"):
            cls = Exists if kind == "ex" else Forall
            return cls(rng.randrange(n), gen(budget - 1))
        left = rng.randint(1, max(1, budget - 2))
        a = gen(left)
        b = gen(max(1, budget - 1 - left))
        return {"and": And, "or": Or, "imp": Implies}[kind](a, b)
    return gen(rng.randint(1, size))


def canonical_corpus(variables=("x",), n: int = 2, depth: int = 2, size: int = 7) -> list:
    """Every term over ``variables`` with cylindrification nesting at most
    ``depth`` and at most ``size`` nodes, smallest first."""
    leaves = [Var(v) for v in variables]
    table: dict = {}

    def gen(k, d):
        key = (k, d)
        if key in table:
            return table[key]
        out = []
        if k == 1:
            out = list(leaves)
        else:
            out.extend(Not(a) for a in gen(k - 1, d))
            if d > 0:
                for a in gen(k - 1, d - 1):
                    out.extend(Cyl(i, a) for i in range(n))
            for left in range(1, k - 1):
                for a in gen(left, d):
                    for b in gen(k - 1 - left, d):
                        out.append(Meet(a, b))
                        out.append(Join(a, b))
        table[key] = out
        return out
    seen = {}
    for k in range(1, size + 1):
        for t in gen(k, depth):
            seen.setdefault(t, None)
    return list(seen)

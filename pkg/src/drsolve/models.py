"""Finite relativized units, the full set algebra P(V) over them, and the
labelled witness construction with its surgeries.

Points are n-tuples of base ids; every coordinate at or beyond n is the same
tail constant, so c_i acts as the identity for i >= n and is never stored.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .forms import (NormalForm, forms_to_json, intern_form, intern_form_degree,
                    is_consistent, projection)
from .terms import Cyl, Join, Meet, Not, One, Term, Var, Zero, subterms

__all__ = [
    "Unit", "WitnessModel", "ModelError", "EvaluationError",
    "evaluate", "evaluate_mask", "point_form", "build_witness", "zigzag",
    "extend_plus", "bridge", "product_unit", "ProductIso",
    "model_from_tree", "witness_to_json", "witness_to_dot", "TAIL",
]

TAIL = "t"


class ModelError(ValueError):
    pass


class EvaluationError(KeyError):
    pass


class Unit:
    """A finite unit V with bitmask encodings of its subsets."""

    def __init__(self, points, n: int):
        if n < 2:
            raise ModelError("dimension must be at least 2")
        seen = {}
        for p in points:
            p = tuple(p)
            if len(p) != n:
                raise ModelError(f"point {p!r} does not have {n} coordinates")
            seen.setdefault(p, len(seen))
        if not seen:
            raise ModelError("a unit must be nonempty")
        self.n = n
        self.points = tuple(seen)
        self.index = seen
        self.full = (1 << len(self.points)) - 1
        self.classes = []
        self.class_masks = []
        for i in range(n):
            groups: dict = {}
            for p, k in seen.items():
                key = p[:i] + p[i + 1:]
                groups[key] = groups.get(key, 0) | (1 << k)
            masks = list(groups.values())
            self.classes.append(masks)
            per_point = [0] * len(self.points)
            for m in masks:
                rest = m
                while rest:
                    low = rest & -rest
                    per_point[low.bit_length() - 1] = m
                    rest ^= low
            self.class_masks.append(per_point)

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"Unit(n={self.n}, |V|={len(self.points)})"

    @property
    def base(self):
        return sorted({c for p in self.points for c in p}, key=str)

    def cyl(self, i: int, mask: int) -> int:
        if i >= self.n:
            return mask
        out = 0
        for c in self.classes[i]:
            if c & mask:
                out |= c
        return out

    def mask(self, points) -> int:
        m = 0
        for p in points:
            try:
                m |= 1 << self.index[tuple(p)]
            except KeyError:
                raise ModelError(f"{p!r} is not a point of the unit") from None
        return m

    def decode(self, mask: int) -> frozenset:
        return frozenset(p for k, p in enumerate(self.points) if mask >> k & 1)

    def neighbours(self, i: int, p) -> frozenset:
        """The points related to ``p`` by agreement off coordinate i."""
        if i >= self.n:
            return frozenset([tuple(p)])
        return self.decode(self.class_masks[i][self.index[tuple(p)]])


def evaluate_mask(unit: Unit, ev_masks: dict, t: Term) -> int:
    memo: dict = {}
    for node in subterms(t):
        if isinstance(node, Var):
            try:
                val = ev_masks[node.name]
            except KeyError:
                raise EvaluationError(f"unknown variable {node.name!r}") from None
        elif isinstance(node, Zero):
            val = 0
        elif isinstance(node, One):
            val = unit.full
        elif isinstance(node, Not):
            val = unit.full & ~memo[id(node.arg)]
        elif isinstance(node, Meet):
            val = memo[id(node.left)] & memo[id(node.right)]
        elif isinstance(node, Join):
            val = memo[id(node.left)] | memo[id(node.right)]
        elif isinstance(node, Cyl):
            val = unit.cyl(node.index, memo[id(node.arg)])
        else:
            raise TypeError(f"not a term: {node!r}")
        memo[id(node)] = val
    return memo[id(t)]


def evaluate(model, t: Term, ev: dict | None = None) -> frozenset:
    """Interpretation of ``t`` in P(V).

    ``model`` is a WitnessModel, or a Unit together with ``ev`` mapping each
    variable to a set of points.
    """
    if isinstance(model, WitnessModel):
        unit, ev = model.unit, model.ev if ev is None else ev
    else:
        unit = model
        if ev is None:
            ev = {}
    masks = {x: unit.mask(ps) for x, ps in ev.items()}
    return unit.decode(evaluate_mask(unit, masks, t))


@dataclass(eq=False)
class WitnessModel:
    n: int
    base: tuple
    points: tuple
    ev: dict
    root: tuple
    variables: tuple
    levels: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)
    tags: dict = field(default_factory=dict)
    marks: dict = field(default_factory=dict)

    def __post_init__(self):
        self.unit = Unit(self.points, self.n)
        self.points = self.unit.points
        self._forms: dict = {}

    def __repr__(self):
        return f"WitnessModel(n={self.n}, |V|={len(self.points)}, |U|={len(self.base)})"

    def satisfies(self, p, t: Term) -> bool:
        return tuple(p) in evaluate(self, t)

    def point_ids(self) -> dict:
        return {p: f"p{k}" for k, p in enumerate(self.points)}


def _ev_from_tags(points, tags, variables):
    return {x: frozenset(p for p in points if p in tags and x in tags[p].color)
            for x in variables}


def point_form(model: WitnessModel, p, d: int, variables=None) -> NormalForm:
    """The degree-d form satisfied at ``p``."""
    variables = frozenset(model.variables if variables is None else variables)
    p = tuple(p)
    unit = model.unit
    cache = model._forms
    ev = {x: unit.mask(model.ev.get(x, ())) for x in variables}

    def go(k, depth):
        key = (k, depth, variables)
        hit = cache.get(key)
        if hit is not None:
            return hit
        color = {x for x in variables if ev[x] >> k & 1}
        if depth == 0:
            result = intern_form(color, None, model.n, variables)
        else:
            subs = []
            for i in range(model.n):
                cls = unit.class_masks[i][k]
                members = set()
                while cls:
                    low = cls & -cls
                    members.add(go(low.bit_length() - 1, depth - 1))
                    cls ^= low
                subs.append(members)
            result = intern_form_degree(color, subs, model.n, variables, depth)
        cache[key] = result
        return result

    return go(unit.index[p], d)


def build_witness(form: NormalForm) -> WitnessModel:
    """Finite unit whose single level-0 point satisfies ``form``.

    Level l+1 is obtained by giving every point of level l (created in
    direction j), for every direction i != j, one fresh i-neighbour per member
    of its tag's successor set in direction i.  The root counts as created in
    no direction.
    """
    if not is_consistent(form):
        raise ModelError("cannot build a witness for an inconsistent form")
    n = form.dim
    root = tuple(f"v{i}" for i in range(n))
    base = list(root)
    points = [root]
    levels = {root: 0}
    classes = {root: None}
    tags = {root: form}
    frontier = [root]
    position = {root: 0}
    for level in range(form.degree):
        nxt = []
        for v in frontier:
            parent = position[v]
            for i in range(n):
                if i == classes[v]:
                    continue
                for c, sigma in enumerate(tags[v].subs[i]):
                    u = f"u{level + 1}_{i}_{parent}_{c}"
                    base.append(u)
                    p = v[:i] + (u,) + v[i + 1:]
                    position[p] = len(points)
                    points.append(p)
                    levels[p] = level + 1
                    classes[p] = i
                    tags[p] = sigma
                    nxt.append(p)
        frontier = nxt
    variables = tuple(sorted(form.variables))
    return WitnessModel(n=n, base=tuple(base), points=tuple(points),
                        ev=_ev_from_tags(points, tags, variables), root=root,
                        variables=variables, levels=levels, classes=classes, tags=tags)


def zigzag(model: WitnessModel) -> list:
    """Points v_0..v_k with tag(v_h) of degree h, v_k the root, and
    consecutive points linked alternately by agreement off coordinate 1
    (from v_0) and off coordinate 0 (into v_k)."""
    top = model.tags[model.root]
    k = top.degree
    if k % 2:
        raise ModelError("the root tag must have even degree")
    path = [model.root]
    cur = model.root
    for step in range(k):
        direction = 0 if step % 2 == 0 else 1
        target = projection(model.tags[cur], model.tags[cur].degree - 1)
        nxt = None
        for u in sorted(model.unit.neighbours(direction, cur), key=model.unit.index.get):
            if (u != cur and model.classes.get(u) == direction
                    and model.levels.get(u) == model.levels[cur] + 1
                    and model.tags.get(u) is target):
                nxt = u
                break
        if nxt is None:
            raise ModelError("model does not have the layered witness shape")
        path.append(nxt)
        cur = nxt
    path.reverse()
    return path


def _fresh(base, stem):
    taken = set(base)
    if stem not in taken:
        return stem
    k = 1
    while f"{stem}{k}" in taken:
        k += 1
    return f"{stem}{k}"


def extend_plus(model: WitnessModel, form: NormalForm) -> WitnessModel:
    """Add one point, the bottom of the zigzag with coordinate 0 replaced by a
    brand new base element, tagged by a degree-0 form it did not have."""
    if not model.variables:
        raise ModelError("the variable set must be nonempty")
    if form.degree != 0:
        raise ModelError("the new point must be tagged by a degree-0 form")
    v0 = zigzag(model)[0]
    if form is projection(model.tags[v0], 0):
        raise ModelError("the new tag must differ from the tag of the bottom point")
    z = _fresh(model.base, "z")
    p = (z,) + v0[1:]
    points = model.points + (p,)
    tags = dict(model.tags)
    tags[p] = form
    levels = dict(model.levels)
    levels[p] = model.levels[v0]
    classes = dict(model.classes)
    classes[p] = 0
    marks = dict(model.marks)
    marks["extension"] = p
    return WitnessModel(n=model.n, base=model.base + (z,), points=points,
                        ev=_ev_from_tags(points, tags, model.variables), root=model.root,
                        variables=model.variables, levels=levels, classes=classes,
                        tags=tags, marks=marks)


def _rename(model, prefix):
    def r(p):
        return tuple(prefix + c for c in p)
    return r


def bridge(wt: WitnessModel, ws: WitnessModel, safe=False) -> WitnessModel:
    """Join two witness units with disjoint bases by a chain of n-1 points
    leading from the bottom of the first zigzag to the bottom of the second.

    For n = 2 the last chain point lands in the 1-class of the second bottom
    point, which is not a singleton.  ``safe`` replaces the chain by two
    points on a fresh coordinate that only touch the singleton 0-classes.
    """
    if wt.n != ws.n:
        raise ModelError("models have different dimensions")
    for w in (wt, ws):
        if w.tags[w.root].degree % 2:
            raise ModelError("root tags must have even degree")
    n = wt.n
    bottom_t = zigzag(wt)[0]
    bottom_s = zigzag(ws)[0]
    rt = _rename(wt, "x.")
    rs = _rename(ws, "y.")
    xs = rt(bottom_t)
    ys = rs(bottom_s)
    chain = []
    extra = ()
    if safe and n == 2:
        b = _fresh(tuple(rt(wt.base)) + tuple(rs(ws.base)), "b")
        extra = (b,)
        chain = [(b, xs[1]), (b, ys[1])]
    else:
        w = xs
        for j in range(n - 1):
            w = w[:j] + (ys[j],) + w[j + 1:]
            chain.append(w)
    points = [rt(p) for p in wt.points] + [rs(p) for p in ws.points]
    points += [c for c in chain if c not in points]
    tags = {rt(p): f for p, f in wt.tags.items()}
    tags.update({rs(p): f for p, f in ws.tags.items()})
    levels = {rt(p): lv for p, lv in wt.levels.items()}
    levels.update({rs(p): lv for p, lv in ws.levels.items()})
    classes = {rt(p): c for p, c in wt.classes.items()}
    classes.update({rs(p): c for p, c in ws.classes.items()})
    variables = tuple(sorted(set(wt.variables) | set(ws.variables)))
    ev = {}
    colour_t = wt.tags[bottom_t].color
    colour_s = ws.tags[bottom_s].color
    for x in variables:
        s = {rt(p) for p in wt.ev.get(x, ())} | {rs(p) for p in ws.ev.get(x, ())}
        if extra:
            if x in colour_t:
                s.add(chain[0])
            if x in colour_s:
                s.add(chain[1])
        elif n == 2 and x in colour_t:
            s.add(chain[-1])
        ev[x] = frozenset(s)
    marks = {"tau_root": rt(wt.root), "sigma_root": rs(ws.root),
             "tau_bottom": xs, "sigma_bottom": ys, "bridge": chain}
    return WitnessModel(n=n, base=tuple(rt(wt.base)) + tuple(rs(ws.base)) + extra,
                        points=tuple(points), ev=ev, root=rt(wt.root), variables=variables,
                        levels=levels, classes=classes, tags=tags, marks=marks)


class ProductIso:
    """Checks that (A, B) -> A u B is an embedding of P(V1) x P(V2) into
    P(V1 u V2)."""

    def __init__(self, u1: Unit, u2: Unit, union: Unit):
        self.u1, self.u2, self.union = u1, u2, union

    def psi(self, a: frozenset, b: frozenset) -> frozenset:
        return frozenset(a) | frozenset(b)

    def _lift(self, unit, mask):
        return self.union.mask(unit.decode(mask))

    def check_pair(self, a1: int, b1: int, a2: int, b2: int) -> list:
        """Masks are over u1 (a*) and u2 (b*); returns the names of violated
        operations."""
        u1, u2, uu = self.u1, self.u2, self.union

        def psi(a, b):
            return self._lift(u1, a) | self._lift(u2, b)
        bad = []
        if psi(a1 & a2, b1 & b2) != psi(a1, b1) & psi(a2, b2):
            bad.append("meet")
        if psi(a1 | a2, b1 | b2) != psi(a1, b1) | psi(a2, b2):
            bad.append("join")
        if psi(u1.full & ~a1, u2.full & ~b1) != uu.full & ~psi(a1, b1):
            bad.append("complement")
        for i in range(uu.n):
            if psi(u1.cyl(i, a1), u2.cyl(i, b1)) != uu.cyl(i, psi(a1, b1)):
                bad.append(f"c{i}")
        if (a1, b1) != (a2, b2) and psi(a1, b1) == psi(a2, b2):
            bad.append("injective")
        return bad

    def check(self, samples: int = 100, seed: int = 0) -> list:
        rng = random.Random(seed)
        failures = []
        for _ in range(samples):
            a1 = rng.getrandbits(len(self.u1.points))
            b1 = rng.getrandbits(len(self.u2.points))
            a2 = rng.getrandbits(len(self.u1.points))
            b2 = rng.getrandbits(len(self.u2.points))
            for op in self.check_pair(a1, b1, a2, b2):
                failures.append({"op": op, "pair": [a1, b1, a2, b2]})
        return failures


def product_unit(first, second):
    u1 = first.unit if isinstance(first, WitnessModel) else first
    u2 = second.unit if isinstance(second, WitnessModel) else second
    if u1.n != u2.n:
        raise ModelError("units have different dimensions")
    if set(u1.base) & set(u2.base):
        raise ModelError("bases must be disjoint")
    union = Unit(u1.points + u2.points, u1.n)
    return union, ProductIso(u1, u2, union)


def model_from_tree(n, variables, root_coords, nodes) -> WitnessModel:
    """Assemble a unit from a search tree.

    ``nodes`` is a list of (parent index or None, direction, true variables)
    in creation order; the parent precedes its children.
    """
    points = []
    levels = {}
    classes = {}
    base = list(root_coords)
    colors = {}
    for k, (parent, direction, true_vars) in enumerate(nodes):
        if parent is None:
            p = tuple(root_coords)
            levels[p] = 0
        else:
            q = points[parent]
            u = f"u{levels[q] + 1}_{direction}_{parent}_{k}"
            base.append(u)
            p = q[:direction] + (u,) + q[direction + 1:]
            levels[p] = levels[q] + 1
        classes[p] = direction
        points.append(p)
        colors[p] = true_vars
    ev = {x: frozenset(p for p in points if x in colors[p]) for x in variables}
    return WitnessModel(n=n, base=tuple(base), points=tuple(points), ev=ev,
                        root=points[0], variables=tuple(sorted(variables)),
                        levels=levels, classes=classes)


# ---------------------------------------------------------------- export

def witness_to_json(model: WitnessModel) -> dict:
    ids = model.point_ids()
    forms = [model.tags[p] for p in model.points if p in model.tags]
    table, form_ids = forms_to_json(forms) if forms else ({"variables": [], "forms": {}}, [])
    tag_id = {}
    for f, fid in zip(forms, form_ids):
        tag_id[f.uid] = fid
    points = []
    for p in model.points:
        entry = {"id": ids[p], "coords": list(p), "level": model.levels.get(p),
                 "class": model.classes.get(p)}
        if p in model.tags:
            entry["tagFormId"] = tag_id[model.tags[p].uid]
        points.append(entry)
    doc = {
        "n": model.n,
        "base": list(model.base),
        "tail": TAIL,
        "points": points,
        "forms": table["forms"],
        "ev": {x: [ids[p] for p in model.points if p in model.ev.get(x, ())]
               for x in model.variables},
        "root": ids[model.root],
    }
    if model.marks:
        marks = {}
        for k, v in sorted(model.marks.items()):
            if isinstance(v, list):
                marks[k] = [ids[p] for p in v]
            else:
                marks[k] = ids[v]
        doc["marks"] = marks
    return doc


def witness_to_dot(model: WitnessModel) -> str:
    ids = model.point_ids()
    lines = ["graph witness {"]
    for p in model.points:
        color = [x for x in model.variables if p in model.ev.get(x, ())]
        label = f"{ids[p]}\\n({','.join(p)})\\n{{{','.join(color)}}}"
        shape = ', shape=doublecircle' if p == model.root else ''
        lines.append(f'  {ids[p]} [label="{label}"{shape}];')
    unit = model.unit
    for i in range(model.n):
        for mask in unit.classes[i]:
            members = sorted(unit.decode(mask), key=unit.index.get)
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    lines.append(f'  {ids[members[a]]} -- {ids[members[b]]} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

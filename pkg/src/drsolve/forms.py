"""Hintikka-style normal forms F_k(X;n), hash-consed.

A degree-0 form fixes the sign of every variable in X.  A degree-(k+1) form
additionally fixes, for every direction i < n and every degree-k form s,
whether c_i s holds; ``subs[i]`` is the set of s for which it does.
"""

from __future__ import annotations

import itertools
import os
import threading

from .terms import Cyl, Not, Term, Var, join_all, meet_all, Meet, Join, One, Zero

__all__ = [
    "NormalForm", "FormError", "FormCapExceeded",
    "intern_form", "count_forms", "enumerate_forms", "projection",
    "is_consistent", "form_entails", "form_to_term", "default_cap",
    "forms_to_json", "forms_from_json", "degree0_form",
]

DEFAULT_CAP = 10 ** 5


def default_cap() -> int:
    return int(os.environ.get("DRSOLVE_FORM_CAP", DEFAULT_CAP))


class FormError(ValueError):
    pass


class FormCapExceeded(FormError):
    pass


class NormalForm:
    __slots__ = ("degree", "color", "subs", "dim", "variables", "key", "uid")

    def __setattr__(self, name, value):
        raise AttributeError("normal forms are immutable")

    def __repr__(self):
        if self.degree == 0:
            lits = [v if v in self.color else "-" + v for v in sorted(self.variables)]
            return f"<form0 {' '.join(lits) or '1'}>"
        return f"<form{self.degree} #{self.uid} color={sorted(self.color)}>"

    def __lt__(self, other):
        return self.key < other.key


_TABLE: dict = {}
_LOCK = threading.Lock()
_COUNTER = itertools.count()


def intern_form(color, subs=None, dim: int = 2, variables=None, degree=None) -> NormalForm:
    """Return the canonical node for (color, subs).

    ``subs`` is a sequence of length ``dim`` of collections of forms that all
    share one degree d; the result then has degree d + 1.  Without ``subs``
    the result has degree 0 and ``variables`` must be given.  ``degree`` is
    only needed when every successor set is empty.
    """
    if dim < 2:
        raise FormError("dimension must be at least 2")
    color = frozenset(color)
    if degree is not None and subs is not None:
        if variables is None:
            variables = {m.variables for s in subs for m in s}
            if len(variables) != 1:
                raise FormError("cannot infer the variable set")
            variables = variables.pop()
        return intern_form_degree(color, subs, dim, variables, degree)
    if subs is None:
        if variables is None:
            raise FormError("a degree-0 form needs its variable set")
        variables = frozenset(variables)
        degree = 0
        packed = None
    else:
        subs = [frozenset(s) for s in subs]
        if len(subs) != dim:
            raise FormError(f"expected {dim} successor sets, got {len(subs)}")
        members = [m for s in subs for m in s]
        if not members and variables is None:
            raise FormError("cannot infer the variable set from empty successor sets")
        degrees = {m.degree for m in members}
        if len(degrees) > 1:
            raise FormError(f"mixed-degree successor sets: degrees {sorted(degrees)}")
        if members:
            sub_degree = degrees.pop()
            varsets = {m.variables for m in members}
            if variables is not None:
                varsets.add(frozenset(variables))
            if len(varsets) != 1:
                raise FormError("successor forms range over different variable sets")
            variables = varsets.pop()
            if any(m.dim != dim for m in members):
                raise FormError("successor forms have a different dimension")
        else:
            raise FormError("degree of empty successor sets is ambiguous; pass degree=")
        degree = sub_degree + 1
        packed = tuple(tuple(sorted(s, key=lambda m: m.key)) for s in subs)
    return _make(color, packed, dim, variables, degree)


def _make(color, packed, dim, variables, degree):
    if not color <= variables:
        raise FormError(f"color {sorted(color)} is not a subset of {sorted(variables)}")
    if packed is None:
        tkey = (variables, dim, color)
    else:
        tkey = (variables, dim, color, degree,
                tuple(tuple(m.uid for m in s) for s in packed))
    node = _TABLE.get(tkey)
    if node is not None:
        return node
    with _LOCK:
        node = _TABLE.get(tkey)
        if node is None:
            node = object.__new__(NormalForm)
            sa = object.__setattr__
            sa(node, "degree", degree)
            sa(node, "color", color)
            sa(node, "subs", packed)
            sa(node, "dim", dim)
            sa(node, "variables", variables)
            if packed is None:
                key = (0, tuple(sorted(color)))
            else:
                key = (degree, tuple(sorted(color)),
                       tuple(tuple(m.key for m in s) for s in packed))
            sa(node, "key", key)
            sa(node, "uid", next(_COUNTER))
            _TABLE[tkey] = node
    return node


def intern_form_degree(color, subs, dim, variables, degree) -> NormalForm:
    """Like ``intern_form`` but with an explicit degree, so that empty
    successor sets (inconsistent forms) can be built."""
    if dim < 2:
        raise FormError("dimension must be at least 2")
    subs = [frozenset(s) for s in subs]
    if len(subs) != dim:
        raise FormError(f"expected {dim} successor sets, got {len(subs)}")
    for s in subs:
        for m in s:
            if m.degree != degree - 1 or m.dim != dim or m.variables != frozenset(variables):
                raise FormError("successor form does not fit")
    packed = tuple(tuple(sorted(s, key=lambda m: m.key)) for s in subs)
    return _make(frozenset(color), packed, dim, frozenset(variables), degree)


def degree0_form(color, variables, dim: int = 2) -> NormalForm:
    return intern_form(color, None, dim, variables)


def count_forms(size_x: int, n: int, k: int) -> int:
    """|F_k(X;n)| for |X| = size_x, by the recurrence |F_{k+1}| = 2^|X| 2^(n|F_k|)."""
    if n < 2:
        raise FormError("dimension must be at least 2")
    count = 2 ** size_x
    for _ in range(k):
        count = 2 ** size_x * 2 ** (n * count)
    return count


def _subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def enumerate_forms(variables, n: int, k: int, cap: int | None = None) -> list:
    """All of F_k(X;n) in canonical order."""
    cap = default_cap() if cap is None else cap
    variables = frozenset(variables)
    total = count_forms(len(variables), n, k)
    if total > cap:
        raise FormCapExceeded(f"|F_{k}| = {total} exceeds the cap {cap}")
    colors = [frozenset(c) for c in _subsets(sorted(variables))]
    level = sorted((intern_form(c, None, n, variables) for c in colors), key=lambda f: f.key)
    for degree in range(1, k + 1):
        choices = [frozenset(s) for s in _subsets(level)]
        nxt = []
        for c in colors:
            for subs in itertools.product(choices, repeat=n):
                nxt.append(intern_form_degree(c, subs, n, variables, degree))
        level = sorted(nxt, key=lambda f: f.key)
    return level


_PROJ: dict = {}


def projection(form: NormalForm, h: int) -> NormalForm:
    """The unique degree-h form above ``form``."""
    if h > form.degree or h < 0:
        raise FormError(f"cannot project a degree-{form.degree} form to degree {h}")
    if h == form.degree:
        return form
    key = (form.uid, h)
    hit = _PROJ.get(key)
    if hit is not None:
        return hit
    if h == 0:
        result = intern_form(form.color, None, form.dim, form.variables)
    else:
        subs = [frozenset(projection(m, h - 1) for m in s) for s in form.subs]
        result = intern_form_degree(form.color, subs, form.dim, form.variables, h)
    _PROJ[key] = result
    return result


_CONSISTENT: dict = {}


def is_consistent(form: NormalForm) -> bool:
    """Syntactic nonzero test.

    Every successor set must contain the form's own projection (x <= c_i x),
    every successor in direction i must see exactly the projections of the
    direction-i successors (c_i(x c_i y) = c_i x c_i y along an i-class), and
    successors must themselves be consistent.
    """
    if form.degree == 0:
        return True
    hit = _CONSISTENT.get(form.uid)
    if hit is not None:
        return hit
    result = _check_consistent(form)
    _CONSISTENT[form.uid] = result
    return result


def _check_consistent(form):
    k = form.degree
    own = projection(form, k - 1)
    for s in form.subs:
        if own not in s:
            return False
    for s in form.subs:
        for member in s:
            if not is_consistent(member):
                return False
    if k >= 2:
        for i, s in enumerate(form.subs):
            seen = frozenset(projection(m, k - 2) for m in s)
            for member in s:
                if frozenset(member.subs[i]) != seen:
                    return False
    return True


def form_entails(form: NormalForm, t: Term) -> bool:
    """Whether ``form`` lies below ``t`` (otherwise it is disjoint from it)."""
    if t.depth > form.degree:
        raise FormError(f"term depth {t.depth} exceeds form degree {form.degree}")
    if not t.vars <= form.variables:
        raise FormError(f"term variables {sorted(t.vars - form.variables)} not in the form")
    if t.max_index >= form.dim:
        raise FormError(f"term index {t.max_index} outside dimension {form.dim}")
    return _entails(form, t, {})


def _entails(form, t, memo):
    key = (form.uid, id(t))
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(t, One):
        r = True
    elif isinstance(t, Zero):
        r = False
    elif isinstance(t, Var):
        r = t.name in form.color
    elif isinstance(t, Not):
        r = not _entails(form, t.arg, memo)
    elif isinstance(t, Meet):
        r = _entails(form, t.left, memo) and _entails(form, t.right, memo)
    elif isinstance(t, Join):
        r = _entails(form, t.left, memo) or _entails(form, t.right, memo)
    elif isinstance(t, Cyl):
        r = any(_entails(m, t.arg, memo) for m in form.subs[t.index])
    else:
        raise TypeError(f"not a term: {t!r}")
    memo[key] = r
    return r


_TERMS: dict = {}


def form_to_term(form: NormalForm, cap: int | None = None) -> Term:
    """The defining product of a form.

    Degree-1 forms are written literally, with a negated c_i s conjunct for
    every degree-0 s outside ``subs[i]``.  From degree 2 on F_{k-1} is not
    enumerable, so the negated part is written as -c_i(-(sum of subs[i])),
    which is equal to the literal product because F_{k-1} partitions the unit.
    From degree 2 on the projection to degree k-1 is added as a conjunct.
    """
    cap = default_cap() if cap is None else cap
    hit = _TERMS.get(form.uid)
    if hit is not None:
        return hit
    conjuncts = [Var(v) if v in form.color else Not(Var(v)) for v in sorted(form.variables)]
    if form.degree >= 2:
        # redundant, since a form entails its projection, but it names the
        # right summand of each -c_i(-(sum)) below for a search
        conjuncts.append(form_to_term(projection(form, form.degree - 1), cap))
    if form.degree == 1:
        if 2 ** len(form.variables) > cap:
            raise FormCapExceeded("too many degree-0 forms to print literally")
        everything = enumerate_forms(form.variables, form.dim, 0, cap)
    for i in range(form.degree and form.dim):
        members = form.subs[i]
        conjuncts.extend(Cyl(i, form_to_term(m, cap)) for m in members)
        if form.degree == 1:
            present = set(members)
            conjuncts.extend(Not(Cyl(i, form_to_term(m, cap)))
                             for m in everything if m not in present)
        else:
            conjuncts.append(Not(Cyl(i, Not(join_all(form_to_term(m, cap) for m in members)))))
    result = meet_all(conjuncts)
    _TERMS[form.uid] = result
    return result


# ---------------------------------------------------------------- JSON

def forms_to_json(roots) -> tuple[dict, list]:
    """Serialize forms into a flat id table.

    Returns ``(table, root_ids)``.  Ids are assigned in a post-order walk with
    successors in canonical order, so equal inputs give equal output across
    runs and processes.
    """
    ids: dict = {}
    table: dict = {}
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if node.uid in ids:
                continue
            if not done:
                stack.append((node, True))
                if node.subs:
                    for s in reversed(node.subs):
                        for m in reversed(s):
                            if m.uid not in ids:
                                stack.append((m, False))
                continue
            fid = f"f{len(ids)}"
            ids[node.uid] = fid
            entry = {"degree": node.degree, "dim": node.dim, "color": sorted(node.color)}
            if node.subs is not None:
                entry["subs"] = [[ids[m.uid] for m in s] for s in node.subs]
            table[fid] = entry
    variables = sorted(set().union(*(r.variables for r in roots))) if roots else []
    return {"variables": variables, "forms": table}, [ids[r.uid] for r in roots]


def forms_from_json(doc: dict) -> dict:
    """Inverse of ``forms_to_json``; returns id -> NormalForm."""
    variables = frozenset(doc["variables"])
    table = doc["forms"]
    built: dict = {}

    def build(fid):
        if fid in built:
            return built[fid]
        entry = table[fid]
        if "subs" not in entry or entry["degree"] == 0:
            node = intern_form(entry["color"], None, entry["dim"], variables)
        else:
            subs = [[build(m) for m in s] for s in entry["subs"]]
            node = intern_form_degree(entry["color"], subs, entry["dim"], variables,
                                      entry["degree"])
        built[fid] = node
        return node

    for fid in table:
        build(fid)
    return built

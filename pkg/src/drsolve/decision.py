"""Satisfiability and equational validity by a label search whose successful
runs are assembled into finite witness units.

A node of the search carries a partial truth assignment (a label) to
subterms of the input.  Each assigned compound subterm is justified by its
assigned parts, so any total extension agrees with the label on assigned
subterms.  Children are created in direction j to witness positive c_j
literals; a child shares the ±c_j literals of its parent and is never
expanded in direction j.  A child that needs a c_j literal its parent has not
fixed reports it, and the parent retries with that literal fixed each way.
"""

from __future__ import annotations

import sys
import time
from collections import deque
from dataclasses import dataclass, field

from .forms import degree0_form, form_entails, form_to_term
from .models import (WitnessModel, bridge, build_witness, evaluate, extend_plus, model_from_tree,
                     point_form, witness_to_json, zigzag)
from .terms import Cyl, Join, Meet, Not, One, Term, Var, Zero, effective_dim, render, subterms

__all__ = [
    "Verdict", "CertificateError", "DecisionError",
    "decide_sat", "decide_eq", "decide_valid", "split", "split_forms", "fresh_split",
    "zero_dim_witness", "dimension_set", "even_degree",
]

TRACE_CAP = 100
REF_LIMIT = 60
RECURSION = 50000


class CertificateError(RuntimeError):
    """A verdict failed its own re-check."""


class DecisionError(ValueError):
    pass


@dataclass
class Verdict:
    kind: str
    model: WitnessModel | None = None
    point: tuple | None = None
    trace: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    side: str | None = None

    def __bool__(self):
        return self.kind in ("SAT", "VALID")

    def to_json(self, timing=False) -> dict:
        doc = {"verdict": self.kind}
        if self.model is not None:
            ids = self.model.point_ids()
            cert = {"witness": witness_to_json(self.model), "point": ids[self.point]}
            if self.side is not None:
                cert["satisfies"] = self.side
            doc["certificate"] = cert
        elif self.kind == "UNSAT" and self.trace:
            doc["certificate"] = {"trace": self.trace}
        stats = {k: v for k, v in self.stats.items() if k != "millis"}
        if timing and "millis" in self.stats:
            stats["millis"] = self.stats["millis"]
        doc["stats"] = stats
        return doc


_SOLVED, _FAIL, _NEED = "solved", "fail", "need"


class _Search:
    """One satisfiability run.

    Every assigned literal carries its reasons: the requirement literals and
    branching decisions it follows from.  A failure returns a core, a subset
    of the requirement that is already unsatisfiable; cores drive
    backjumping and are kept as lemmas that close any later label containing
    them.  A failure that depended on an undecided inherited literal carries
    a need marker instead and is neither learned nor final.
    """

    def __init__(self, t: Term, n: int, want_trace=False):
        self.n = n
        self.order = {s: k for k, s in enumerate(subterms(t))}
        self.memo: dict = {}
        self.lemmas: dict = {}
        self.harmless: set = set()
        self.flat: dict = {}
        self.labels = 0
        self.decisions = 0
        self.want_trace = want_trace
        self.trace: list = []
        self.refs: dict = {}

    # -- lemmas

    def _learn(self, core):
        core = frozenset(core)
        for lit in core:
            self.lemmas.setdefault(lit, []).append(core)
        if self.want_trace and len(self.trace) < TRACE_CAP:
            self.trace.append(self._lits(dict(core)))

    def _violated(self, assign, lit):
        for lemma in self.lemmas.get(lit, ()):
            reasons = set()
            for term, val in lemma:
                got = assign.get(term)
                if got is None or got[0] != val:
                    break
                reasons |= got[1]
            else:
                return frozenset(reasons)
        return None

    # -- labels

    def _propagate(self, assign, disj, agenda, d, req):
        """Returns None or the reasons of a conflict."""
        n = self.n
        while agenda:
            term, val, why = agenda.pop()
            cur = assign.get(term)
            if cur is not None:
                if cur[0] != val:
                    return why | cur[1]
                continue
            assign[term] = (val, why)
            bad = self._violated(assign, (term, val))
            if bad is not None:
                return bad
            if isinstance(term, Var):
                continue
            if isinstance(term, Zero):
                if val:
                    return why
            elif isinstance(term, One):
                if not val:
                    return why
            elif isinstance(term, Not):
                agenda.append((term.arg, not val, why))
            elif isinstance(term, Meet):
                if val:
                    agenda.append((term.right, True, why))
                    agenda.append((term.left, True, why))
                else:
                    disj.append(term)
            elif isinstance(term, Join):
                if not val:
                    agenda.append((term.right, False, why))
                    agenda.append((term.left, False, why))
                else:
                    disj.append(term)
            elif isinstance(term, Cyl):
                if term.index >= n:
                    agenda.append((term.arg, val, why))
                elif term.index == d and term not in req:
                    return why | {("need", term)}
                elif not val:
                    agenda.append((term.arg, False, why))
        return None

    def _members(self, term):
        """Operands of a nested run of the same binary operator."""
        hit = self.flat.get(term)
        if hit is None:
            kind = type(term)
            hit, todo = [], [term]
            while todo:
                t = todo.pop()
                if type(t) is kind:
                    todo.append(t.right)
                    todo.append(t.left)
                else:
                    hit.append(t)
            self.flat[term] = hit
        return hit

    def _open(self, assign, disj, agenda):
        """Queue forced operands of true sums and false products; return a
        conflict, or the first open choice, or None for a complete label."""
        choice = None
        keep = []
        for term in disj:
            want, why = assign[term]
            free = []
            done = False
            for m in self._members(term):
                got = assign.get(m)
                if got is None:
                    free.append(m)
                elif got[0] == want:
                    done = True
                    break
            if done:
                continue
            if len(free) <= 1:
                reasons = set(why)
                for m in self._members(term):
                    if m in assign:
                        reasons |= assign[m][1]
                if not free:
                    return "conflict", frozenset(reasons)
                agenda.append((free[0], want, frozenset(reasons)))
            elif choice is None:
                choice = (free[0], want)
            keep.append(term)
        disj[:] = keep
        return None, choice

    def _dpll(self, d, req, assign, disj, agenda):
        while True:
            bad = self._propagate(assign, disj, agenda, d, req)
            if bad is not None:
                return ("conflict", bad)
            kind, info = self._open(assign, disj, agenda)
            if kind == "conflict":
                return ("conflict", info)
            if not agenda:
                break
        if info is None:
            self.labels += 1
            return self._expand(d, req, assign)
        bad = self._doomed(assign, d)
        if bad is not None:
            return ("conflict", bad)
        term, want = info
        self.decisions += 1
        token = ("decision", self.decisions)
        first = self._dpll(d, req, dict(assign), list(disj), [(term, want, frozenset([token]))])
        if first[0] != "conflict" or token not in first[1]:
            return first
        return self._dpll(d, req, dict(assign), list(disj), [(term, not want, first[1] - {token})])

    # -- children

    def _class_literals(self, assign, j):
        lits, pos, neg = {}, [], []
        for term, (val, _) in assign.items():
            if isinstance(term, Cyl) and term.index == j:
                lits[term] = val
                (pos if val else neg).append(term)
        return lits, pos, neg

    def _child(self, assign, j, cyl, lits, neg):
        """Solve a j-child holding the argument of ``cyl``, refuting the
        argument of every negative c_j literal and sharing all c_j literals
        of the parent."""
        psi = cyl.arg
        for c in [cyl] + neg:
            atom = c.arg
            if isinstance(atom, Cyl) and atom.index == j and atom not in lits:
                # class-wide literal the parent has not decided yet
                return ("retry", atom)
        creq = dict(lits)
        for c in neg:
            chi = c.arg
            if creq.get(chi) is True:
                return ("conflict", self._reasons(assign, (c, chi)))
            creq[chi] = False
        if creq.get(psi) is False:
            return ("conflict", self._reasons(assign, (cyl, psi)))
        creq[psi] = True
        r = self.solve(j, creq)
        if r[0] == _FAIL:
            used = set()
            for t, _ in r[1]:
                if t in lits:
                    used.add(t)
                if t is psi:
                    used.add(cyl)
                for c in neg:
                    if c.arg is t:
                        used.add(c)
            return ("conflict", self._reasons(assign, used))
        if r[0] == _NEED:
            return ("retry", r[1])
        return ("ok", r[1])

    def _reasons(self, assign, terms):
        out = set()
        for term in terms:
            out |= assign[term][1]
        return frozenset(out)

    def _doomed(self, assign, d):
        """Reasons of a child failure already forced by a partial label.

        A failed requirement stays failed under more literals, and a node
        that could witness c_j psi itself could equally use a fresh j-child,
        so such a failure rules out every completion of ``assign``.
        """
        for j in range(self.n):
            if j == d:
                continue
            lits, pos, neg = self._class_literals(assign, j)
            if not pos:
                continue
            key = (j, frozenset(lits.items()))
            if key in self.harmless:
                continue
            for cyl in pos:
                r = self._child(assign, j, cyl, lits, neg)
                if r[0] == "conflict":
                    return r[1]
            self.harmless.add(key)
        return None

    def _expand(self, d, req, assign):
        label = {t: v for t, (v, _) in assign.items()}
        children = []
        for j in range(self.n):
            if j == d:
                continue
            lits, pos, neg = self._class_literals(assign, j)
            pos.sort(key=self.order.get)
            made = []
            for cyl in pos:
                psi = cyl.arg
                if label.get(psi) is True:
                    continue
                if any(child[0].get(psi) is True for child in made):
                    continue
                r = self._child(assign, j, cyl, lits, neg)
                if r[0] != "ok":
                    return r
                made.append(r[1])
            children.extend((j, tree) for tree in made)
        return ("sat", (label, children))

    # -- nodes

    def solve(self, d, req: dict):
        key = (d, frozenset(req.items()))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        result = self._solve(d, req)
        self.memo[key] = result
        return result

    def _solve(self, d, req):
        start = sorted(req.items(), key=lambda kv: self.order[kv[0]], reverse=True)
        agenda = [(t, v, frozenset([(t, v)])) for t, v in start]
        r = self._dpll(d, req, {}, [], agenda)
        if r[0] == "sat":
            return (_SOLVED, r[1])
        if r[0] == "retry":
            theta = r[1]
            cores = []
            pending = None
            for val in (True, False):
                extended = dict(req)
                extended[theta] = val
                sub = self.solve(d, extended)
                if sub[0] == _SOLVED:
                    return sub
                if sub[0] == _NEED:
                    pending = pending or sub
                else:
                    cores.append(sub[1] - {(theta, val)})
            if pending:
                return pending
            core = frozenset().union(*cores)
            self._learn(core)
            return (_FAIL, core)
        why = r[1]
        needs = sorted((lit[1] for lit in why if lit[0] == "need"), key=self.order.get)
        if needs:
            return (_NEED, needs[0])
        core = frozenset(lit for lit in why if lit[0] != "decision")
        self._learn(core)
        return (_FAIL, core)

    def _lits(self, req):
        out = []
        for term, val in sorted(req.items(), key=lambda kv: self.order[kv[0]]):
            text = render(term)
            if len(text) > REF_LIMIT:
                text = f"#{self.order[term]}"
                self.refs.setdefault(text, render(term))
            out.append(text if val else f"NOT {text}")
        return out


def _assemble(tree, n, variables):
    nodes = []

    def walk(node, parent, direction):
        label, children = node
        idx = len(nodes)
        true_vars = {t.name for t, v in label.items() if v and isinstance(t, Var)}
        nodes.append((parent, direction, true_vars))
        for j, child in children:
            walk(child, idx, j)
    walk(tree[1] if tree[0] == _SOLVED else tree, None, None)
    return model_from_tree(n, variables, tuple(f"v{i}" for i in range(n)), nodes)


def _dim(n, *terms):
    if n is None:
        return effective_dim(*terms)
    if n < 2:
        raise DecisionError("dimension must be at least 2")
    return n


def decide_sat(t: Term, n: int | None = None, trace=False) -> Verdict:
    """SAT with a witness unit whose root lies in t, or UNSAT."""
    started = time.perf_counter()
    n = _dim(n, t)
    search = _Search(t, n, want_trace=trace)
    if sys.getrecursionlimit() < RECURSION:
        sys.setrecursionlimit(RECURSION)
    result = search.solve(None, {t: True})
    stats = {"labelsExplored": search.labels}
    if result[0] == _SOLVED:
        model = _assemble(result, n, sorted(t.vars))
        if model.root not in evaluate(model, t):
            raise CertificateError(f"witness does not satisfy {render(t)}")
        stats.update(points=len(model.points), baseSize=len(model.base))
        stats["millis"] = round((time.perf_counter() - started) * 1000, 3)
        return Verdict("SAT", model, model.root, stats=stats)
    if result[0] == _NEED:
        raise CertificateError("unresolved requirement at the root")
    stats.update(points=0, baseSize=0)
    stats["millis"] = round((time.perf_counter() - started) * 1000, 3)
    steps = [{"closed": lits} for lits in search.trace]
    if trace and search.refs:
        steps.append({"refs": dict(sorted(search.refs.items()))})
    return Verdict("UNSAT", trace=steps, stats=stats)


def decide_eq(s: Term, t: Term, n: int | None = None, trace=False) -> Verdict:
    n = _dim(n, s, t)
    started = time.perf_counter()
    labels = 0
    steps = []
    for side, probe, holds in (("left", Meet(s, Not(t)), s), ("right", Meet(t, Not(s)), t)):
        v = decide_sat(probe, n, trace=trace)
        labels += v.stats["labelsExplored"]
        if v.kind == "SAT":
            stats = dict(v.stats, labelsExplored=labels)
            stats["millis"] = round((time.perf_counter() - started) * 1000, 3)
            p = v.point
            if (p in evaluate(v.model, s)) == (p in evaluate(v.model, t)):
                raise CertificateError("countermodel does not separate the terms")
            return Verdict("INVALID", v.model, p, stats=stats, side=side)
        steps.extend(v.trace)
    stats = {"labelsExplored": labels, "points": 0, "baseSize": 0,
             "millis": round((time.perf_counter() - started) * 1000, 3)}
    return Verdict("VALID", trace=steps, stats=stats)


def decide_valid(t: Term, n: int | None = None, trace=False) -> Verdict:
    """t = 1 holds iff -t is unsatisfiable."""
    v = decide_sat(Not(t), n, trace=trace)
    if v.kind == "SAT":
        return Verdict("INVALID", v.model, v.point, stats=v.stats, side="negation")
    return Verdict("VALID", trace=v.trace, stats=v.stats)


def even_degree(t: Term) -> int:
    return t.depth + (t.depth % 2)


def _form_below(t: Term, n: int, k: int):
    v = decide_sat(t, n)
    if v.kind != "SAT":
        raise DecisionError(f"input is unsatisfiable: {render(t)}")
    tau = point_form(v.model, v.point, k)
    if not form_entails(tau, t):
        raise CertificateError("chosen form does not entail the input")
    return tau


def split_forms(t: Term, n: int | None = None):
    """The two distinct degree k+1 forms behind ``split``."""
    if not t.vars:
        raise DecisionError("split needs at least one variable")
    n = _dim(n, t)
    k = even_degree(t)
    tau = _form_below(t, n, k)
    w = build_witness(tau)
    bottom = zigzag(w)[0]
    old = point_form(w, bottom, 0)
    variables = sorted(tau.variables)
    fresh = None
    for colour in _degree0_order(variables):
        cand = degree0_form(colour, variables, n)
        if cand is not old:
            fresh = cand
            break
    wplus = extend_plus(w, fresh)
    fa = point_form(w, w.root, k + 1)
    fb = point_form(wplus, wplus.root, k + 1)
    if fa is fb:
        raise CertificateError("extension did not change the root form")
    return fa, fb


def split(t: Term, n: int | None = None):
    """Two disjoint satisfiable terms below a satisfiable t."""
    fa, fb = split_forms(t, n)
    return form_to_term(fa), form_to_term(fb)


def _degree0_order(variables):
    from itertools import product
    for bits in product((False, True), repeat=len(variables)):
        yield {x for x, b in zip(variables, bits) if b}


def fresh_split(t: Term, y: str, n: int | None = None):
    if y in t.vars:
        raise DecisionError(f"variable {y!r} occurs in the input")
    if decide_sat(t, n).kind != "SAT":
        raise DecisionError(f"input is unsatisfiable: {render(t)}")
    return Meet(t, Var(y)), Meet(t, Not(Var(y)))


@dataclass
class ZeroDim:
    indices: list
    model: WitnessModel | None
    point: tuple | None
    trivial: bool = False


def _word_term(t, word):
    for i in reversed(word):
        t = Cyl(i, t)
    return t


def zero_dim_witness(t: Term, n: int | None = None) -> ZeroDim:
    n = _dim(n, t)
    pos = decide_sat(t, n)
    neg = decide_sat(Not(t), n)
    if pos.kind != "SAT" or neg.kind != "SAT":
        return ZeroDim([], None, None, trivial=True)
    k = even_degree(t)
    tau = point_form(pos.model, pos.point, k)
    sigma = point_form(neg.model, neg.point, k)
    for safe in (False, True):
        model = bridge(build_witness(tau), build_witness(sigma), safe=safe)
        start = model.marks["sigma_root"]
        goal = model.marks["tau_root"]
        word = _shortest_word(model, start, goal)
        if word is None:
            continue
        probe = Meet(Not(t), _word_term(t, word))
        if start in evaluate(model, probe):
            return ZeroDim(word, model, start)
    raise CertificateError("no bridged certificate found")


def _shortest_word(model, start, goal):
    unit = model.unit
    seen = {start: []}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if p == goal:
            return seen[p]
        for i in range(model.n):
            for q in sorted(unit.neighbours(i, p), key=unit.index.get):
                if q not in seen:
                    seen[q] = seen[p] + [i]
                    queue.append(q)
    return None


def dimension_set(t: Term, n: int | None = None) -> set:
    n = _dim(n, t)
    return {i for i in range(n) if decide_eq(Cyl(i, t), t, n).kind == "INVALID"}

"""Terms of diagonal-free algebras, first-order formulas without equality,
their parsers and printers, and the formula-to-term translation.

Terms are hash-consed: building a node whose structure already exists
returns the existing object, so structural equality is identity and large
shared DAGs (normal forms rendered as terms) stay cheap to hash and compare.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass

__all__ = [
    "Term", "Zero", "One", "Var", "Not", "Meet", "Join", "Cyl",
    "ZERO", "ONE", "meet_all", "join_all", "effective_dim",
    "Formula", "Atom", "FNot", "And", "Or", "Implies", "Exists", "Forall",
    "ParseError", "EqualityError",
    "parse_term", "parse_formula", "render", "formula_to_term", "atom_name",
    "subterms",
]

_VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:@\d+(?:,\d+)*)?\Z")
_CYL_NAME_RE = re.compile(r"c\d")

_TABLE: dict = {}
_LOCK = threading.Lock()


class Term:
    """Base class of interned term nodes.

    Every node carries ``depth`` (cylindrification nesting), ``max_index``
    (largest cylindrification index or -1), ``vars`` and ``size`` (tree size).
    """

    __slots__ = ("depth", "max_index", "vars", "size", "__weakref__")

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def _init(self, depth, max_index, vars_, size):
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "max_index", max_index)
        object.__setattr__(self, "vars", vars_)
        object.__setattr__(self, "size", size)

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return render(self)

    def __reduce__(self):
        return (parse_term, (render(self),))


def _intern(key, build):
    node = _TABLE.get(key)
    if node is not None:
        return node
    with _LOCK:
        node = _TABLE.get(key)
        if node is None:
            node = build()
            _TABLE[key] = node
    return node


class Zero(Term):
    __slots__ = ()

    def __new__(cls):
        def build():
            node = object.__new__(cls)
            node._init(0, -1, frozenset(), 1)
            return node
        return _intern(("0",), build)

    def __repr__(self):
        return "Zero()"


class One(Term):
    __slots__ = ()

    def __new__(cls):
        def build():
            node = object.__new__(cls)
            node._init(0, -1, frozenset(), 1)
            return node
        return _intern(("1",), build)

    def __repr__(self):
        return "One()"


class Var(Term):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        if not isinstance(name, str) or not _VAR_RE.match(name) or _CYL_NAME_RE.match(name):
            raise ValueError(f"invalid variable name {name!r}")

        def build():
            node = object.__new__(cls)
            node._init(0, -1, frozenset([name]), 1)
            object.__setattr__(node, "name", name)
            return node
        return _intern(("v", name), build)

    def __repr__(self):
        return f"Var({self.name!r})"


class Not(Term):
    __slots__ = ("arg",)

    def __new__(cls, arg: Term):
        def build():
            node = object.__new__(cls)
            node._init(arg.depth, arg.max_index, arg.vars, arg.size + 1)
            object.__setattr__(node, "arg", arg)
            return node
        return _intern(("-", id(arg)), build)

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Not({self.arg!r})"


class _Binary(Term):
    __slots__ = ("left", "right")
    _tag = ""

    def __new__(cls, left: Term, right: Term):
        def build():
            node = object.__new__(cls)
            node._init(max(left.depth, right.depth),
                       max(left.max_index, right.max_index),
                       left.vars | right.vars,
                       left.size + right.size + 1)
            object.__setattr__(node, "left", left)
            object.__setattr__(node, "right", right)
            return node
        return _intern((cls._tag, id(left), id(right)), build)

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Meet(_Binary):
    __slots__ = ()
    _tag = "*"


class Join(_Binary):
    __slots__ = ()
    _tag = "+"


class Cyl(Term):
    __slots__ = ("index", "arg")

    def __new__(cls, index: int, arg: Term):
        if not isinstance(index, int) or index < 0:
            raise ValueError(f"cylindrification index must be a natural, got {index!r}")

        def build():
            node = object.__new__(cls)
            node._init(arg.depth + 1, max(index, arg.max_index), arg.vars, arg.size + 1)
            object.__setattr__(node, "index", index)
            object.__setattr__(node, "arg", arg)
            return node
        return _intern(("c", index, id(arg)), build)

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Cyl({self.index}, {self.arg!r})"


ZERO = Zero()
ONE = One()


def effective_dim(*terms: Term) -> int:
    return max([2] + [t.max_index + 1 for t in terms])


def meet_all(terms) -> Term:
    """Left-nested product; the empty product is 1."""
    result = None
    for t in terms:
        result = t if result is None else Meet(result, t)
    return ONE if result is None else result


def join_all(terms) -> Term:
    result = None
    for t in terms:
        result = t if result is None else Join(result, t)
    return ZERO if result is None else result


def subterms(t: Term) -> list:
    """Distinct DAG nodes of ``t`` in post-order (children before parents)."""
    seen = set()
    order = []
    stack = [(t, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(node.children()):
            if id(child) not in seen:
                stack.append((child, False))
    return order


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("atom argument list must be nonempty")
        if any(not isinstance(a, int) or a < 0 for a in self.args):
            raise ValueError(f"atom arguments must be variable indices: {self.args!r}")


@dataclass(frozen=True)
class FNot:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    index: int
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    index: int
    body: "Formula"


Formula = (Atom, FNot, And, Or, Implies, Exists, Forall)


def atom_name(relation: str, args) -> str:
    return f"{relation}@{','.join(str(a) for a in args)}"


def formula_to_term(f) -> Term:
    """Quantifiers become cylindrifications; each (relation, argument tuple)
    pair becomes its own generator ``R@i1,...,ik``."""
    if isinstance(f, Atom):
        return Var(atom_name(f.relation, f.args))
    if isinstance(f, FNot):
        return Not(formula_to_term(f.arg))
    if isinstance(f, And):
        return Meet(formula_to_term(f.left), formula_to_term(f.right))
    if isinstance(f, Or):
        return Join(formula_to_term(f.left), formula_to_term(f.right))
    if isinstance(f, Implies):
        return Join(Not(formula_to_term(f.left)), formula_to_term(f.right))
    if isinstance(f, Exists):
        return Cyl(f.index, formula_to_term(f.body))
    if isinstance(f, Forall):
        return Not(Cyl(f.index, Not(formula_to_term(f.body))))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- lexing

class ParseError(ValueError):
    def __init__(self, message, text="", pos=0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.column = col


class EqualityError(ParseError):
    pass


_TERM_TOKENS = re.compile(r"""
    (?P<ws>\s+)
  | (?P<cyl>c(?P<idx>\d+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:@\d+(?:,\d+)*)?)
  | (?P<const>[01])
  | (?P<op>[-~*&+|()])
""", re.VERBOSE)

_FORMULA_TOKENS = re.compile(r"""
    (?P<ws>\s+)
  | (?P<var>v(?P<vidx>\d+)\b)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|[~&|().,])
  | (?P<eq>=)
""", re.VERBOSE)


def _lex(text, pattern):
    tokens = []
    pos = 0
    while pos < len(text):
        m = pattern.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind == "idx":
            kind = "cyl"
        if kind == "vidx":
            kind = "var"
        if kind == "eq":
            raise EqualityError(
                "'=' is not in the language: identity is not a logical symbol here",
                text, pos)
        if kind != "ws":
            tokens.append((kind, m.group(0), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, pattern):
        self.text = text
        self.tokens = _lex(text, pattern)
        self.i = 0
        self.open = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, *values):
        kind, value, _ = self.peek()
        return kind in ("op", "ident") and value in values

    def expect(self, value):
        kind, got, pos = self.peek()
        if got != value or kind == "eof":
            if kind == "eof" and value == ")":
                raise ParseError("unbalanced parenthesis: expected ')'", self.text, pos)
            raise ParseError(f"expected {value!r}, found {got or 'end of input'!r}", self.text, pos)
        return self.take()

    def fail(self, what):
        kind, got, pos = self.peek()
        if kind == "eof" and self.open:
            raise ParseError(f"unbalanced parenthesis: expected {what} and ')'", self.text, pos)
        found = "end of input" if kind == "eof" else repr(got)
        raise ParseError(f"expected {what}, found {found}", self.text, pos)

    def finish(self, result):
        kind, got, pos = self.peek()
        if kind != "eof":
            if got == ")":
                raise ParseError("unbalanced parenthesis: unexpected ')'", self.text, pos)
            raise ParseError(f"unexpected {got!r}", self.text, pos)
        return result


class _TermParser(_Parser):
    def join(self):
        node = self.meet()
        while self.at("+", "|"):
            self.take()
            node = Join(node, self.meet())
        return node

    def meet(self):
        node = self.unary()
        while self.at("*", "&"):
            self.take()
            node = Meet(node, self.unary())
        return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value in ("-", "~"):
            self.take()
            return Not(self.unary())
        if kind == "cyl":
            self.take()
            return Cyl(int(value[1:]), self.unary())
        return self.atom()

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "const":
            self.take()
            return ONE if value == "1" else ZERO
        if kind == "ident":
            self.take()
            return Var(value)
        if kind == "op" and value == "(":
            self.take()
            self.open += 1
            node = self.join()
            self.expect(")")
            self.open -= 1
            return node
        self.fail("a term")


def parse_term(text: str) -> Term:
    p = _TermParser(text, _TERM_TOKENS)
    return p.finish(p.join())


class _FormulaParser(_Parser):
    def iff(self):
        left = self.implies()
        if self.at("<->"):
            self.take()
            right = self.iff()
            return And(Implies(left, right), Implies(right, left))
        return left

    def implies(self):
        left = self.disj()
        if self.at("->"):
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self):
        node = self.conj()
        while self.at("|"):
            self.take()
            node = Or(node, self.conj())
        return node

    def conj(self):
        node = self.unary()
        while self.at("&"):
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "~":
            self.take()
            return FNot(self.unary())
        if kind == "ident" and value in ("exists", "forall"):
            self.take()
            vkind, vtext, _ = self.peek()
            if vkind != "var":
                self.fail("a variable such as v0")
            self.take()
            self.expect(".")
            body = self.unary()
            cls = Exists if value == "exists" else Forall
            return cls(int(vtext[1:]), body)
        if kind == "op" and value == "(":
            self.take()
            self.open += 1
            node = self.iff()
            self.expect(")")
            self.open -= 1
            return node
        if kind == "ident":
            self.take()
            self.expect("(")
            args = [self.variable()]
            while self.at(","):
                self.take()
                args.append(self.variable())
            self.expect(")")
            return Atom(value, tuple(args))
        self.fail("a formula")

    def variable(self):
        kind, value, _ = self.peek()
        if kind != "var":
            self.fail("a variable such as v0")
        self.take()
        return int(value[1:])


def parse_formula(text: str):
    """Parse a first-order formula without equality.

    Quantifiers bind a single unary formula (``exists v0. R(v0)`` or
    ``exists v0. (R(v0) & S(v0))``); ``<->`` is accepted as shorthand for a
    conjunction of two implications.
    """
    p = _FormulaParser(text, _FORMULA_TOKENS)
    return p.finish(p.iff())


# ---------------------------------------------------------------- printing

def _render_term(t: Term, level: int, memo: dict) -> str:
    # levels: 0 join, 1 meet, 2 unary
    key = (id(t), level)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(t, Zero):
        s = "0"
    elif isinstance(t, One):
        s = "1"
    elif isinstance(t, Var):
        s = t.name
    elif isinstance(t, Not):
        s = "-" + _render_term(t.arg, 2, memo)
    elif isinstance(t, Cyl):
        s = f"c{t.index} " + _render_term(t.arg, 2, memo)
    elif isinstance(t, Meet):
        s = _render_term(t.left, 1, memo) + " * " + _render_term(t.right, 2, memo)
        if level > 1:
            s = f"({s})"
    elif isinstance(t, Join):
        s = _render_term(t.left, 0, memo) + " + " + _render_term(t.right, 1, memo)
        if level > 0:
            s = f"({s})"
    else:
        raise TypeError(f"not a term: {t!r}")
    memo[key] = s
    return s


def _render_formula(f, level: int) -> str:
    # levels: 0 implication, 1 disjunction, 2 conjunction, 3 unary
    if isinstance(f, Atom):
        return f"{f.relation}({','.join(f'v{a}' for a in f.args)})"
    if isinstance(f, FNot):
        return "~" + _render_formula(f.arg, 3)
    if isinstance(f, (Exists, Forall)):
        word = "exists" if isinstance(f, Exists) else "forall"
        return f"{word} v{f.index}. " + _render_formula(f.body, 3)
    if isinstance(f, And):
        s = _render_formula(f.left, 2) + " & " + _render_formula(f.right, 3)
        return f"({s})" if level > 2 else s
    if isinstance(f, Or):
        s = _render_formula(f.left, 1) + " | " + _render_formula(f.right, 2)
        return f"({s})" if level > 1 else s
    if isinstance(f, Implies):
        s = _render_formula(f.left, 1) + " -> " + _render_formula(f.right, 0)
        return f"({s})" if level > 0 else s
    raise TypeError(f"not a formula: {f!r}")


def render(x) -> str:
    """Canonical text for a term or formula; parsing it gives ``x`` back."""
    if isinstance(x, Term):
        return _render_term(x, 0, {})
    return _render_formula(x, 0)

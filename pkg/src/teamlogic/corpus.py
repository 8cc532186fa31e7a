"""Named formulas and random formula generators used by tests and the CLI."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .parser import parse_formula
from .syntax import (
    And,
    Atom,
    Dep,
    Equals,
    Exists,
    Forall,
    Formula,
    NegAtom,
    NegDep,
    NotEquals,
    Or,
    Var,
    Vocabulary,
    disj,
    free_vars,
)

BASE_VOCAB = Vocabulary((("P", 1), ("E", 2)))


def at_most_k(k: int) -> Formula:
    """``forall x. (dep(x) | ... | dep(x))`` with k disjuncts: true iff the domain has at most k elements."""
    if k < 1:
        raise ValueError("k must be positive")
    return Forall("x", disj([Dep((Var("x"),))] * k))


LE_CARD = "forall x. exists y. (dep(y,x) & (!P(x) | Q(y)))"
GE_CARD = "forall x. exists y. (dep(y,x) & (!Q(x) | P(y)))"
INFINITY = "forall x. exists y. (dep(y,x) & !(c=y))"


def le_card() -> Formula:
    return parse_formula(LE_CARD)


def equicardinality() -> Formula:
    return And(parse_formula(LE_CARD), parse_formula(GE_CARD))


def infinity_axiom() -> Formula:
    return parse_formula(INFINITY, constants=("c",))


@dataclass(frozen=True)
class Entry:
    name: str
    text: str
    constants: tuple[str, ...] = ()

    def formula(self) -> Formula:
        return parse_formula(self.text, constants=self.constants)


# Reference formulas: cardinality examples, translation table entries,
# grid axioms over one relation, and one formula per ESO clause family.
REFERENCE = [
    Entry("le-card", LE_CARD),
    Entry("ge-card", GE_CARD),
    Entry("infinity", INFINITY, ("c",)),
    Entry("at-most-1", "forall x. dep(x)"),
    Entry("at-most-2", "forall x. (dep(x) | dep(x))"),
    Entry("at-most-3", "forall x. (dep(x) | dep(x) | dep(x))"),
    Entry("dep-xy", "dep(x,y)"),
    Entry("dep-yx", "dep(y,x)"),
    Entry("dep-x", "dep(x)"),
    Entry("dep-y", "dep(y)"),
    Entry("neg-dep-xy", "!dep(x,y)"),
    Entry("slash-y", "exists x/{y}. x=y"),
    Entry("slash-x", "exists y/{x}. x=y"),
    Entry("slash-xy", "exists y/{x,y}. x=y"),
    Entry("slash-self", "exists x/{x}. P(x)"),
    Entry("slash-all", "exists x/{x,y}. P(x)"),
    Entry("functional-E", "forall x. forall y. (!E(y,x) | exists y/{x}. x=y)"),
    Entry("injective-E", "forall x. forall y. (!E(x,y) | exists y/{x}. x=y)"),
    Entry("root-E", "exists x. forall y. !E(y,x)"),
    Entry("infinite-E", "forall x. exists y. E(x,y)"),
    Entry("join-E", "forall x. forall y. (!E(x,y) | exists x/{y}. (E(y,x) | P(x)))"),
    Entry("literal-clause", "E(x,y)"),
    Entry("neg-dep-clause", "!dep(x,y)"),
    Entry("or-clause", "dep(x,y) | P(y)"),
    Entry("zeroary-clause", "P(x) | forall x. forall y. E(x,y)"),
    Entry("and-clause", "dep(x) & P(y)"),
    Entry("exists-clause", "exists y. (dep(x,y) & E(x,y))"),
    Entry("forall-clause", "forall y. (E(x,y) | dep(y))"),
    Entry("dep-sentence", "forall x. exists y. (dep(x,y) & E(x,y))"),
    Entry("inverse-sentence", "forall x. exists y. (dep(y,x) & E(x,y))"),
]


# ----------------------------------------------------------------- random


_VARS = ("x", "y")


def _literal(rng: random.Random) -> Formula:
    kind = rng.randrange(4)
    a, b = (Var(rng.choice(_VARS)) for _ in range(2))
    if kind == 0:
        return Equals(a, b) if rng.random() < 0.5 else NotEquals(a, b)
    if kind == 1:
        return Atom("P", (a,)) if rng.random() < 0.5 else NegAtom("P", (a,))
    return Atom("E", (a, b)) if rng.random() < 0.5 else NegAtom("E", (a, b))


def _dep_atom(rng: random.Random) -> Formula:
    if rng.random() < 0.35:
        args = (Var(rng.choice(_VARS)),)
    else:
        args = tuple(Var(v) for v in rng.sample(_VARS, 2))
    return Dep(args) if rng.random() < 0.85 else NegDep(args)


def _slashed(rng: random.Random, body: Formula) -> Formula:
    var = rng.choice(_VARS)
    slash = rng.choice([frozenset(), frozenset({"x"}), frozenset({"y"}), frozenset({"x", "y"})])
    return Exists(var, body, slash)


def random_formula(rng: random.Random, depth: int, kind: str = "d2") -> Formula:
    """Random formula over {P/1, E/2} with variables x, y.

    ``kind`` is ``d2`` (dependence atoms), ``if2`` (slashed quantifiers) or
    ``fo2`` (neither).
    """
    if depth <= 0 or rng.random() < 0.2:
        if kind == "d2" and rng.random() < 0.4:
            return _dep_atom(rng)
        return _literal(rng)
    op = rng.randrange(4)
    if op == 0:
        return And(random_formula(rng, depth - 1, kind), random_formula(rng, depth - 1, kind))
    if op == 1:
        return Or(random_formula(rng, depth - 1, kind), random_formula(rng, depth - 1, kind))
    body = random_formula(rng, depth - 1, kind)
    if op == 2:
        if kind == "if2":
            return _slashed(rng, body)
        return Exists(rng.choice(_VARS), body)
    return Forall(rng.choice(_VARS), body)


def random_sentence(rng: random.Random, depth: int, kind: str = "d2") -> Formula:
    """Random sentence: a random formula closed by quantifiers over its free variables."""
    f = random_formula(rng, depth, kind)
    for v in sorted(free_vars(f), reverse=True):
        f = Forall(v, f) if rng.random() < 0.5 else Exists(v, f)
    return f

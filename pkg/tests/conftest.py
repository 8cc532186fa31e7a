"""Shared fixtures: a literal team-semantics oracle, the test corpus and structure generators."""

from __future__ import annotations

import itertools
import random

import pytest

from teamlogic.corpus import REFERENCE, random_formula
from teamlogic.structures import Structure, Team, enumerate_structures
from teamlogic.syntax import (
    And,
    Atom,
    Const,
    Dep,
    Equals,
    Exists,
    Forall,
    Formula,
    NegAtom,
    NegDep,
    NotEquals,
    Or,
    Vocabulary,
    conjuncts,
    vocabulary_of,
)
from teamlogic.tiling import gen_phi_fingrid, gen_phi_grid


# ------------------------------------------------------------ naive oracle


def _value(s: Structure, row: dict, t) -> int:
    return s.constants[t.name] if isinstance(t, Const) else row[t.name]


def _literal(s: Structure, row: dict, f: Formula) -> bool:
    if isinstance(f, Equals):
        return _value(s, row, f.left) == _value(s, row, f.right)
    if isinstance(f, NotEquals):
        return _value(s, row, f.left) != _value(s, row, f.right)
    args = tuple(_value(s, row, t) for t in f.args)
    inside = args in s.relations[f.name]
    return inside if isinstance(f, Atom) else not inside


def _rows(team: list[dict]) -> list[dict]:
    seen, out = set(), []
    for r in team:
        key = tuple(sorted(r.items()))
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


def naive_sat(s: Structure, team: list[dict], f: Formula) -> bool:
    """Satisfaction by brute force over every cover and every choice function.

    Teams are lists of dicts; nothing here is shared with the package evaluator.
    """
    team = _rows(team)
    if not team:
        return True
    if isinstance(f, (Equals, NotEquals, Atom, NegAtom)):
        return all(_literal(s, r, f) for r in team)
    if isinstance(f, And):
        return naive_sat(s, team, f.left) and naive_sat(s, team, f.right)
    if isinstance(f, Or):
        for labels in itertools.product((0, 1, 2), repeat=len(team)):
            left = [r for r, lab in zip(team, labels) if lab != 1]
            right = [r for r, lab in zip(team, labels) if lab != 0]
            if naive_sat(s, left, f.left) and naive_sat(s, right, f.right):
                return True
        return False
    if isinstance(f, Forall):
        return naive_sat(s, [{**r, f.var: a} for r in team for a in range(s.size)], f.body)
    if isinstance(f, Exists):
        kept = [v for v in team[0] if v not in f.slash]
        for values in itertools.product(range(s.size), repeat=len(team)):
            independent = all(
                values[i] == values[j]
                for i, j in itertools.combinations(range(len(team)), 2)
                if all(team[i][v] == team[j][v] for v in kept)
            )
            if independent and naive_sat(s, [{**r, f.var: a} for r, a in zip(team, values)], f.body):
                return True
        return False
    if isinstance(f, Dep):
        vals = [tuple(_value(s, r, t) for t in f.args) for r in team]
        return all(a[-1] == b[-1] for a in vals for b in vals if a[:-1] == b[:-1])
    if isinstance(f, NegDep):
        return False
    raise TypeError(f"unexpected node {f!r}")


def team_rows(team: Team) -> list[dict]:
    return list(team)


# ----------------------------------------------------------------- corpus


def _random_entries() -> list[tuple[str, Formula]]:
    rng = random.Random(20240611)
    out = []
    for kind in ("d2", "if2", "fo2"):
        for i in range(8):
            out.append((f"random-{kind}-{i}", random_formula(rng, 3, kind)))
    return out


def _grid_entries() -> list[tuple[str, Formula]]:
    out = [(f"grid-{i}", c) for i, c in enumerate(conjuncts(gen_phi_grid()))]
    out += [(f"fingrid-{i}", c) for i, c in enumerate(conjuncts(gen_phi_fingrid()))]
    return out


REFERENCE_FORMULAS = [(e.name, e.formula()) for e in REFERENCE]
RANDOM_FORMULAS = _random_entries()
GRID_FORMULAS = _grid_entries()
CORPUS = REFERENCE_FORMULAS + GRID_FORMULAS + RANDOM_FORMULAS


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


# ------------------------------------------------------------- structures


def structures_for(f: Formula, size: int, vocab: Vocabulary | None = None):
    return enumerate_structures(vocab or vocabulary_of(f), size)


def random_structure(rng: random.Random, vocab: Vocabulary, size: int, density: float = 0.4) -> Structure:
    rels = {}
    for name, arity in vocab.relations:
        rels[name] = [t for t in itertools.product(range(size), repeat=arity) if rng.random() < density]
    consts = {c: rng.randrange(size) for c in vocab.constants}
    return Structure(vocab, size, rels, consts)


def random_team(rng: random.Random, domain: tuple[str, ...], size: int, density: float = 0.5) -> Team:
    rows = [r for r in itertools.product(range(size), repeat=len(domain)) if rng.random() < density]
    return Team(domain, frozenset(rows))

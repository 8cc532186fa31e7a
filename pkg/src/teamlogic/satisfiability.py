"""Bounded finite-model search, directly and through the ESO translation.

Both searches return the first model in enumeration order: domain size
ascending, then constant values, then relation interpretations as bitmasks
(earlier symbols more significant, tuple i is bit i). A ``None`` result only
means there is no model up to the bound.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from .corpus import equicardinality
from .errors import FragmentError, UnknownSymbolError
from .grounding import find_model, iter_models
from .semantics import compile_fo, eval_eso, eval_sentence
from .structures import Structure, enumerate_structures
from .syntax import (
    Formula,
    Fragment,
    Vocabulary,
    check_vocabulary,
    classify_fragment,
    free_vars,
    is_first_order,
    vocabulary_of,
)
from .translate import d2_to_eso_sentence


def _require_sentence(f: Formula) -> None:
    if free_vars(f):
        raise FragmentError(f"expected a sentence, free variables {sorted(free_vars(f))}")


def _vocab_for(f: Formula, vocab: Vocabulary | None) -> Vocabulary:
    if vocab is None:
        return vocabulary_of(f)
    check_vocabulary(f, vocab)
    return vocab


def order_key(s: Structure) -> tuple:
    """Position of ``s`` in the enumeration order for its size."""
    consts = tuple(s.constants[c] for c in s.vocab.constants)
    masks = []
    for name, arity in s.vocab.relations:
        tuples = list(itertools.product(range(s.size), repeat=arity))
        masks.append(sum(1 << i for i, t in enumerate(tuples) if t in s.relations[name]))
    return consts + tuple(masks)


def permute(s: Structure, perm: tuple[int, ...]) -> Structure:
    """The isomorphic copy of ``s`` with element a renamed to perm[a]."""
    rels = {n: [tuple(perm[e] for e in t) for t in ts] for n, ts in s.relations.items()}
    consts = {c: perm[v] for c, v in s.constants.items()}
    return Structure(s.vocab, s.size, rels, consts)


def is_canonical(s: Structure) -> bool:
    """True iff no isomorphic copy of ``s`` comes earlier in enumeration order."""
    key = order_key(s)
    for perm in itertools.permutations(range(s.size)):
        if order_key(permute(s, perm)) < key:
            return False
    return True


def _truth_test(f: Formula):
    if is_first_order(f):
        return lambda s: compile_fo(s, f)({})
    return lambda s: eval_sentence(s, f)


def finsat_direct(
    f: Formula,
    max_size: int,
    *,
    vocab: Vocabulary | None = None,
    engine: str = "sat",
    prune_iso: bool = False,
    min_size: int = 1,
) -> Structure | None:
    """First structure of size at most ``max_size`` satisfying the sentence ``f``.

    ``engine="enumerate"`` evaluates every structure in order with the team
    evaluator (``prune_iso`` skips non-canonical ones); ``engine="sat"``
    grounds the team semantics and finds the same structure with a solver.
    First-order sentences, including counting ones, are evaluated classically.
    """
    _require_sentence(f)
    vocab = _vocab_for(f, vocab)
    if engine == "enumerate":
        holds = _truth_test(f)
        for size in range(min_size, max_size + 1):
            for s in enumerate_structures(vocab, size):
                if prune_iso and not is_canonical(s):
                    continue
                if holds(s):
                    return s
        return None
    if engine == "sat":
        for size in range(min_size, max_size + 1):
            if is_first_order(f):
                model = find_model(vocab, size, fo_sentence=f)
            else:
                model = find_model(vocab, size, team_sentence=f)
            if model is not None:
                return model
        return None
    raise ValueError(f"unknown engine {engine!r}")


def finsat_via_eso(
    f: Formula,
    max_size: int,
    *,
    vocab: Vocabulary | None = None,
    engine: str = "sat",
) -> Structure | None:
    """Finite model search for a D² sentence through its ESO translation.

    The sentence is translated with the team relation set to true; a model
    is a structure with some interpretation of the prefix relations making
    the first-order matrix true. Returns the vocabulary reduct.
    """
    _require_sentence(f)
    if Fragment.D2 not in classify_fragment(f):
        raise FragmentError("finsat_via_eso needs a D2 sentence")
    vocab = _vocab_for(f, vocab)
    sigma = d2_to_eso_sentence(f, vocab)
    for size in range(1, max_size + 1):
        if engine == "enumerate":
            for s in enumerate_structures(vocab, size):
                if eval_eso(s, sigma):
                    return s
            continue
        if engine != "sat":
            raise ValueError(f"unknown engine {engine!r}")
        model = find_model(vocab, size, fo_sentence=sigma.matrix, extra=sigma.prefix)
        if model is not None:
            return model
    return None


def structures_satisfying(
    f: Formula, size: int, vocab: Vocabulary | None = None, limit: int | None = None
) -> Iterator[Structure]:
    """Distinct models of a sentence at one size, in no particular order."""
    _require_sentence(f)
    vocab = _vocab_for(f, vocab)
    if is_first_order(f):
        return iter_models(vocab, size, fo_sentence=f, limit=limit)
    return iter_models(vocab, size, team_sentence=f, limit=limit)


def check_equicardinality_formula(s: Structure) -> bool:
    """Evaluate the dependence-logic sentence expressing ``|P| = |Q|``."""
    for name in ("P", "Q"):
        if not s.vocab.has_relation(name) or s.vocab.arity(name) != 1:
            raise UnknownSymbolError(f"structure needs a unary relation {name}")
    return eval_sentence(s, equicardinality())


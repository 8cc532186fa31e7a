import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamlogic.corpus import at_most_k, infinity_axiom, le_card, random_sentence
from teamlogic.errors import FragmentError, UnknownSymbolError
from teamlogic.parser import parse_formula
from teamlogic.satisfiability import (
    check_equicardinality_formula,
    finsat_direct,
    finsat_via_eso,
    is_canonical,
    order_key,
    permute,
    structures_satisfying,
)
from teamlogic.semantics import eval_sentence
from teamlogic.structures import Structure, enumerate_structures, format_structure, parse_structure
from teamlogic.syntax import Vocabulary, vocabulary_of

from suites import check_cross_oracle, check_definable_properties

PQ = Vocabulary((("P", 1), ("Q", 1)))
E = Vocabulary((("E", 2),))


def pq(size, p, q):
    return Structure(PQ, size, {"P": [(a,) for a in p], "Q": [(a,) for a in q]})


# --------------------------------------------------------------- examples


@pytest.mark.parametrize("engine", ["sat", "enumerate"])
def test_at_most_two_has_size_one_model(engine):
    theta = parse_formula("forall x. (dep(x) | dep(x))")
    assert theta == at_most_k(2)
    model = finsat_direct(theta, 5, engine=engine)
    assert model is not None and model.size == 1


def test_at_most_two_has_no_model_of_size_three():
    theta = at_most_k(2)
    assert finsat_direct(theta, 3, min_size=3, engine="enumerate") is None
    assert finsat_direct(theta, 3, min_size=3) is None


@pytest.mark.parametrize("engine", ["sat", "enumerate"])
def test_contradiction_has_no_model(engine):
    assert finsat_direct(parse_formula("exists x. P(x) & forall x. !P(x)"), 4, engine=engine) is None


@pytest.mark.parametrize("engine", ["sat", "enumerate"])
def test_infinity_axiom_has_no_small_model(engine):
    assert finsat_direct(infinity_axiom(), 4, engine=engine) is None


def test_infinity_axiom_fails_everywhere_up_to_four():
    f = infinity_axiom()
    for n in range(1, 5):
        for s in enumerate_structures(vocabulary_of(f), n):
            assert not eval_sentence(s, f)


def test_via_eso_examples():
    model = finsat_via_eso(parse_formula("forall x. dep(x)"), 3)
    assert model is not None and model.size == 1
    assert finsat_direct(parse_formula("forall x. dep(x)"), 3).size == 1
    small = finsat_via_eso(le_card(), 3)
    assert small is not None and small.size == 1


def test_via_eso_returns_a_reduct():
    model = finsat_via_eso(le_card(), 3)
    assert set(model.relations) == {"P", "Q"}
    assert eval_sentence(model, le_card())


def test_via_eso_needs_d2():
    with pytest.raises(FragmentError):
        finsat_via_eso(parse_formula("exists x/{x}. P(x)"), 2)


def test_open_formula_is_rejected():
    with pytest.raises(FragmentError):
        finsat_direct(parse_formula("P(x)"), 2)


def test_counting_sentences_use_classical_semantics():
    f = parse_formula("forall x. exists>=2 y. E(x,y)")
    model = finsat_direct(f, 3)
    assert model.size == 2
    assert model == finsat_direct(f, 3, engine="enumerate")


def test_witness_survives_the_file_format():
    model = finsat_direct(le_card(), 3, min_size=2)
    again, _ = parse_structure(format_structure(model))
    assert again == model


# -------------------------------------------------------- equicardinality


def test_equicardinality_examples():
    assert check_equicardinality_formula(pq(4, [0, 1], [2, 3]))
    assert not check_equicardinality_formula(pq(5, [0, 1, 2], [3, 4]))
    assert check_equicardinality_formula(pq(3, [], []))


def test_equicardinality_needs_p_and_q():
    with pytest.raises(UnknownSymbolError):
        check_equicardinality_formula(Structure(Vocabulary((("P", 1),)), 2))


def test_equicardinality_exhaustive_up_to_three():
    for n in range(1, 4):
        for s in enumerate_structures(PQ, n):
            assert check_equicardinality_formula(s) == (len(s.relations["P"]) == len(s.relations["Q"]))


# ----------------------------------------------------- enumeration order


def test_order_key_ranks_relations_first_symbol_most_significant():
    s = list(enumerate_structures(PQ, 2))
    assert [order_key(x) for x in s] == sorted(order_key(x) for x in s)
    assert s[1].relations["P"] == frozenset() and s[1].relations["Q"] == {(0,)}


def test_canonical_forms_cover_every_isomorphism_class():
    for n in (1, 2, 3):
        every = list(enumerate_structures(E, n))
        canon = [s for s in every if is_canonical(s)]
        for s in every:
            copies = {order_key(permute(s, p)) for p in itertools.permutations(range(n))}
            assert sum(order_key(c) in copies for c in canon) == 1


def test_structures_satisfying_are_models():
    f = le_card()
    models = list(structures_satisfying(f, 3, limit=20))
    assert models and len(set(models)) == len(models)
    assert all(eval_sentence(m, f) for m in models)


def test_structures_satisfying_finds_every_model():
    f = parse_formula("forall x. exists y. (dep(y) & E(x,y))")
    expected = {s for s in enumerate_structures(E, 2) if eval_sentence(s, f)}
    assert set(structures_satisfying(f, 2)) == expected


# ------------------------------------------------------------- properties


SENTENCES = [random_sentence(random.Random(i), 3, "d2") for i in range(40)]


@settings(max_examples=40, deadline=None)
@given(i=st.integers(0, len(SENTENCES) - 1))
def test_engines_report_the_same_first_witness(i):
    f = SENTENCES[i]
    assert finsat_direct(f, 2, engine="sat") == finsat_direct(f, 2, engine="enumerate")


@settings(max_examples=40, deadline=None)
@given(i=st.integers(0, len(SENTENCES) - 1))
def test_isomorphism_pruning_keeps_verdicts(i):
    f = SENTENCES[i]
    plain = finsat_direct(f, 3, engine="enumerate")
    pruned = finsat_direct(f, 3, engine="enumerate", prune_iso=True)
    assert (plain is None) == (pruned is None)
    if plain is not None:
        assert plain.size == pruned.size and eval_sentence(pruned, f)


@settings(max_examples=40, deadline=None)
@given(i=st.integers(0, len(SENTENCES) - 1), extra=st.integers(0, 2))
def test_model_size_is_monotone_in_the_bound(i, extra):
    f = SENTENCES[i]
    first = finsat_direct(f, 2)
    if first is not None:
        later = finsat_direct(f, first.size + extra)
        assert later is not None and later.size <= first.size


def test_definable_properties():
    bad, stats = check_definable_properties()
    assert not bad, bad[:5]


def test_direct_and_eso_paths_agree():
    bad, stats = check_cross_oracle()
    assert not bad, bad
    assert 0 < stats["satisfiable_within_bound"] < 50

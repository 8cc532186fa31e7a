import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamlogic.corpus import random_formula
from teamlogic.errors import FragmentError
from teamlogic.parser import parse_formula, parse_so_sentence
from teamlogic.semantics import eval_eso, eval_sentence, eval_team
from teamlogic.structures import Structure, all_teams, enumerate_structures, rel_of_team
from teamlogic.syntax import (
    CountExists,
    Dep,
    Equals,
    Fragment,
    NotEquals,
    Var,
    Vocabulary,
    classify_fragment,
    free_vars,
    order_vars,
    print_formula,
    print_so_sentence,
    vocabulary_of,
    walk,
)
from teamlogic.translate import (
    FALSE,
    TRUE,
    d2_to_eso,
    d2_to_eso_sentence,
    d2_to_if2,
    eliminate_zeroary,
    if2_to_d3,
    to_scott_shape,
    validate_scott_shape,
    wrap_sentence,
)

from conftest import random_structure, random_team
from suites import check_eso_equivalence, check_translation_equivalence, d2_corpus, d2_sentences, if2_corpus

x, y = Var("x"), Var("y")
XY = ("x", "y")
PE = Vocabulary((("P", 1), ("E", 2)))
EMPTY = Vocabulary(())


def text(f):
    return print_formula(f)


# ------------------------------------------------------------- D2 -> IF2


@pytest.mark.parametrize(
    "source,expected",
    [
        ("dep(x,y)", "exists x/{y}. x=y"),
        ("dep(y,x)", "exists y/{x}. x=y"),
        ("dep(x)", "exists y/{x,y}. x=y"),
        ("dep(y)", "exists x/{x,y}. x=y"),
        ("!dep(x,y)", "!(x=x)"),
        ("!dep(y)", "!(x=x)"),
        ("P(x) & !E(x,y)", "P(x) & !E(x,y)"),
        ("forall x. (dep(x) | P(x))", "forall x. ((exists y/{x,y}. x=y) | P(x))"),
    ],
)
def test_d2_to_if2_table(source, expected):
    assert text(d2_to_if2(parse_formula(source))) == expected


def test_d2_to_if2_negated_dep_is_not_equals():
    assert d2_to_if2(parse_formula("!dep(x,y)")) == NotEquals(x, x)


def test_d2_to_if2_trivial_dep_is_true_equality():
    # dep(x,x) holds on every team, as does x=x
    assert d2_to_if2(parse_formula("dep(x,x)")) == Equals(x, x)


def test_d2_to_if2_never_introduces_z():
    for _, f in d2_corpus():
        assert "z" not in free_vars(d2_to_if2(f))
        assert all(getattr(n, "var", None) != "z" for n in walk(d2_to_if2(f)))


def test_d2_to_if2_rejects_three_variables():
    with pytest.raises(FragmentError):
        d2_to_if2(parse_formula("exists z. dep(x,z)"))


def test_d2_to_if2_rejects_slashes():
    with pytest.raises(FragmentError):
        d2_to_if2(parse_formula("exists x/{y}. x=y"))


# ------------------------------------------------------------- IF2 -> D3


@pytest.mark.parametrize(
    "source,expected",
    [
        ("exists x/{y}. x=y", "exists z. (x=z & exists x. (dep(z,x) & x=y))"),
        ("exists y/{x}. x=y", "exists z. (y=z & exists y. (dep(z,y) & x=y))"),
        ("exists x/{x,y}. P(x)", "exists x. (dep(x) & P(x))"),
        ("exists x/{x}. P(x)", "exists x. (dep(y,x) & P(x))"),
        ("exists x. P(x)", "exists x. P(x)"),
        ("forall y. exists y/{y}. E(x,y)", "forall y. exists y. (dep(x,y) & E(x,y))"),
    ],
)
def test_if2_to_d3_table(source, expected):
    assert text(if2_to_d3(parse_formula(source))) == expected


def test_if2_to_d3_output_is_d3():
    for _, f in if2_corpus():
        assert Fragment.D3 in classify_fragment(if2_to_d3(f))


def test_if2_to_d3_reserves_constant_z():
    f = parse_formula("exists x/{y}. x=z", constants={"z"})
    with pytest.raises(FragmentError):
        if2_to_d3(f)


def test_if2_to_d3_rejects_dependence_atoms():
    with pytest.raises(FragmentError):
        if2_to_d3(parse_formula("dep(x,y)"))


# ------------------------------------------------ equivalence properties


def test_translation_equivalence_at_size_two():
    bad, stats = check_translation_equivalence()
    assert not bad, bad[:5]
    assert stats["d2"] > 0 and stats["if2"] > 0


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32), kind=st.sampled_from(["d2", "if2"]))
def test_translations_preserve_truth_at_size_three(seed, kind):
    rng = random.Random(seed)
    f = random_formula(rng, 3, kind)
    s = random_structure(rng, PE, 3)
    t = random_team(rng, XY, 3)
    g = d2_to_if2(f) if kind == "d2" else if2_to_d3(f)
    assert eval_team(s, t, f) == eval_team(s, t, g)


# -------------------------------------------------------- sentence wrapping


def test_wrap_dependence_free_sentence():
    f = parse_formula("forall x. exists y. E(x,y)")
    assert text(wrap_sentence(f)) == "forall x. forall y. forall x. exists y. E(x,y)"


def test_wrap_rejects_open_formula():
    with pytest.raises(FragmentError):
        wrap_sentence(parse_formula("dep(x,y)"))


def test_wrap_of_everyone_constant_holds_only_on_singletons():
    g = wrap_sentence(parse_formula("forall x. dep(x)"))
    for n in range(1, 4):
        assert eval_sentence(Structure(EMPTY, n), g) == (n == 1)


def test_wrap_of_function_sentence_is_equivalent():
    f = parse_formula("forall x. exists y. (dep(y,x) & !E(x,y))")
    g = wrap_sentence(f)
    for n in range(1, 4):
        for s in enumerate_structures(vocabulary_of(f), n):
            assert eval_sentence(s, f) == eval_sentence(s, g)


def test_wrap_of_if2_sentence_goes_to_d3():
    f = parse_formula("forall x. exists y/{x}. E(x,y)")
    g = wrap_sentence(f)
    assert Fragment.D3 in classify_fragment(g)
    for n in range(1, 3):
        for s in enumerate_structures(vocabulary_of(f), n):
            assert eval_sentence(s, f) == eval_sentence(s, g)


def test_sentence_chain_agrees_up_to_size_three():
    # the sentence, its wrapped IF translation and its ESO translation with the team relation true
    for name, f in d2_sentences(20):
        vocab = vocabulary_of(f)
        wrapped = wrap_sentence(f)
        sigma = d2_to_eso_sentence(f, vocab)
        for n in range(1, 4):
            for s in enumerate_structures(vocab, n):
                truth = eval_sentence(s, f)
                assert eval_sentence(s, wrapped) == truth, (name, s)
                assert eval_eso(s, sigma, "sat") == truth, (name, s)


# -------------------------------------------------------------- D2 -> ESO


@pytest.mark.parametrize(
    "source,expected",
    [
        ("dep(x,y)", "forall x. exists<=1 y. R(x,y)"),
        ("dep(y,x)", "forall y. exists<=1 x. R(x,y)"),
        ("dep(y)", "exists<=1 y. R(y)"),
        ("!dep(x,y)", "forall x. forall y. !R(x,y)"),
        ("E(x,y)", "forall x. forall y. (!R(x,y) | E(x,y))"),
    ],
)
def test_d2_to_eso_single_clauses(source, expected):
    sigma = d2_to_eso(parse_formula(source))
    assert sigma.prefix == ()
    assert print_so_sentence(sigma) == expected


def test_team_relation_arity_follows_free_variables():
    assert d2_to_eso(parse_formula("dep(x,y)")).team_relation == ("R", 2)
    assert d2_to_eso(parse_formula("P(x)")).team_relation == ("R", 1)
    assert d2_to_eso(parse_formula("forall x. P(x)")).team_relation == ("R", 0)


def test_fresh_names_follow_traversal_order():
    sigma = d2_to_eso(parse_formula("dep(x) | P(x)"))
    assert sigma.prefix == (("R1", 1), ("R2", 1))
    assert print_so_sentence(sigma) == (
        "exists-rel R1/1 . exists-rel R2/1 . ((forall x. (!R(x) | (R1(x) | R2(x)))) & "
        "exists<=1 x. R1(x)) & forall x. (!R2(x) | P(x))"
    )


def test_d2_to_eso_rejects_slashes():
    with pytest.raises(FragmentError):
        d2_to_eso(parse_formula("exists x/{y}. x=y"))


def _agrees_on_teams(f, sigma, size):
    name, arity = sigma.team_relation
    for s in enumerate_structures(vocabulary_of(f), size):
        for t in all_teams(order_vars(free_vars(f)), size):
            expanded = s.expand({name: rel_of_team(t)}, arities={name: arity})
            if eval_team(s, t, f) != eval_eso(expanded, sigma, "sat"):
                return False
    return True


@pytest.mark.parametrize(
    "source",
    [
        "dep(x,y)",
        "!dep(x)",
        "P(x) | dep(x)",
        "dep(x,y) & E(x,y)",
        "exists y. (dep(x,y) & E(x,y))",
        "forall y. (dep(y) | E(x,y))",
        "P(x) | forall y. dep(y)",
    ],
)
def test_d2_to_eso_matches_team_semantics(source):
    f = parse_formula(source)
    for size in (1, 2):
        assert _agrees_on_teams(f, d2_to_eso(f), size)


def test_sentence_translation_fixes_team_relation_to_true():
    sigma = d2_to_eso_sentence(parse_formula("forall x. exists y. dep(y,x)"))
    assert sigma.team_relation is None
    assert "R()" not in print_so_sentence(sigma)


def test_truth_constants():
    assert text(TRUE) == "forall x. x=x" and text(FALSE) == "forall x. !(x=x)"
    assert eval_sentence(Structure(EMPTY, 1), TRUE) and not eval_sentence(Structure(EMPTY, 1), FALSE)


# ------------------------------------------------------- 0-ary elimination


def test_eliminate_zeroary_true_branch():
    reduced = eliminate_zeroary(parse_so_sentence("exists-rel R/0 . R()"))
    assert reduced.prefix == ()
    assert reduced.matrix == TRUE


def test_eliminate_zeroary_is_identity_without_zeroary():
    sigma = d2_to_eso(parse_formula("dep(x) | P(x)"))
    assert eliminate_zeroary(sigma) == sigma


def test_eliminate_zeroary_on_open_or_sentence_disjunction():
    # the right disjunct is a sentence, so its part of the team relation is 0-ary
    f = parse_formula("P(x) | forall y. dep(y)")
    sigma = d2_to_eso(f)
    assert any(a == 0 for _, a in sigma.prefix)
    reduced = eliminate_zeroary(sigma)
    assert all(a > 0 for _, a in reduced.prefix)
    for size in (1, 2):
        assert _agrees_on_teams(f, reduced, size)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_eliminate_zeroary_preserves_verdicts(seed):
    rng = random.Random(seed)
    f = random_formula(rng, 3, "d2")
    sigma = d2_to_eso(f)
    reduced = eliminate_zeroary(sigma)
    name, arity = sigma.team_relation
    vocab = vocabulary_of(f).union(Vocabulary(((name, arity),)))
    s = random_structure(rng, vocab, rng.randint(1, 2))
    assert eval_eso(s, sigma, "sat") == eval_eso(s, reduced, "sat")


# ------------------------------------------------------------ Scott shape


def test_scott_shape_of_dep_is_one_functional_atom():
    shape = to_scott_shape(d2_to_eso(parse_formula("dep(x,y)")))
    assert shape.prefix == () and shape.witnesses == () and shape.functional == ("R",)


def test_scott_shape_of_choice_sentence_has_witness_block():
    shape = to_scott_shape(d2_to_eso_sentence(parse_formula("forall x. exists y. dep(y,x)")))
    assert len(shape.witnesses) >= 1
    assert not validate_scott_shape(shape, EMPTY)


def test_scott_shape_round_trips_through_sentence():
    shape = to_scott_shape(d2_to_eso_sentence(parse_formula("forall x. exists y. (dep(y,x) & (!P(x) | Q(y)))")))
    assert parse_so_sentence(print_so_sentence(shape.to_sentence())) == shape.to_sentence()
    assert shape.describe().splitlines()[0].startswith("prefix: ")


def test_scott_shape_functional_atoms_are_binary():
    shape = to_scott_shape(d2_to_eso(parse_formula("dep(y) & dep(x)")))
    arity = dict(shape.prefix)
    arity["R"] = 2
    assert all(arity[r] == 2 for r in shape.functional)


def test_validator_reports_quantifiers():
    shape = to_scott_shape(d2_to_eso(parse_formula("dep(x,y)")))
    bad = type(shape)(shape.prefix, CountExists("<=", 1, "y", Dep((x, y))), (), ())
    assert validate_scott_shape(bad)


def test_scott_shape_handles_disjunction_of_sentences():
    sigma = parse_so_sentence("exists-rel R3/0 . (forall x. R3()) | forall x. (!P(x) | P(x))")
    shape = to_scott_shape(eliminate_zeroary(sigma))
    assert not validate_scott_shape(shape, Vocabulary((("P", 1),)))


def test_eso_suite():
    bad, stats = check_eso_equivalence()
    assert not bad, bad[:5]
    assert stats["families"] == 8 and stats["zeroary"] >= 1

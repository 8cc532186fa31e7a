import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamlogic.corpus import random_formula
from teamlogic.errors import ArityError, FormulaSyntaxError, FragmentError, UnknownSymbolError
from teamlogic.parser import parse_formula, parse_so_sentence
from teamlogic.syntax import (
    And,
    Atom,
    Const,
    CountExists,
    Dep,
    Equals,
    Exists,
    Forall,
    Fragment,
    NegAtom,
    NegDep,
    NotEquals,
    Or,
    SOSentence,
    Var,
    Vocabulary,
    classify_fragment,
    constant_symbols,
    free_vars,
    negate,
    print_formula,
    print_so_sentence,
    walk,
)

from conftest import CORPUS

x, y = Var("x"), Var("y")
VOCAB = Vocabulary((("P", 1), ("Q", 1), ("E", 2)))


# ------------------------------------------------------------------ parser


def test_parse_dep_atom():
    assert parse_formula("dep(x,y)") == Dep((x, y))


def test_parse_pushes_negation_through_conjunction():
    assert parse_formula("!(P(x) & Q(y))") == Or(NegAtom("P", (x,)), NegAtom("Q", (y,)))


def test_parse_slashed_existential():
    assert parse_formula("exists y/{x,y}. x=y") == Exists("y", Equals(x, y), frozenset({"x", "y"}))


def test_parse_negated_dep_is_negdep():
    assert parse_formula("!dep(x,y)") == NegDep((x, y))


def test_quantifier_scope_extends_right():
    f = parse_formula("forall x. P(x) | Q(x)")
    assert f == Forall("x", Or(Atom("P", (x,)), Atom("Q", (x,))))


def test_and_binds_tighter_than_or():
    f = parse_formula("P(x) | Q(x) & E(x,x)")
    assert isinstance(f, Or) and isinstance(f.right, And)


def test_implication_is_negated_antecedent_or_consequent():
    assert parse_formula("P(x) -> Q(x)") == Or(NegAtom("P", (x,)), Atom("Q", (x,)))


def test_implication_rejects_dependence_antecedent():
    with pytest.raises(FragmentError):
        parse_formula("dep(x,y) -> P(x)")


def test_implication_rejects_slashed_antecedent():
    with pytest.raises(FragmentError):
        parse_formula("(exists x/{y}. x=y) -> P(x)")


def test_counting_quantifiers():
    f = parse_formula("exists<=1 y. E(x,y)")
    assert f == CountExists("<=", 1, "y", Atom("E", (x, y)))


def test_negated_counting_quantifier_flips_bound():
    f = parse_formula("!exists<=1 y. E(x,y)")
    assert f == CountExists(">=", 2, "y", Atom("E", (x, y)))


def test_zero_ary_atom():
    assert parse_formula("R() | !R()") == Or(Atom("R", ()), NegAtom("R", ()))


def test_unicode_input():
    assert parse_formula("∀x ∃y (dep(y,x) ∧ (¬P(x) ∨ Q(y)))") == parse_formula(
        "forall x. exists y. (dep(y,x) & (!P(x) | Q(y)))"
    )


def test_constants_from_vocabulary():
    vocab = Vocabulary((("P", 1),), ("c",))
    assert parse_formula("P(c) & x=c", vocab) == And(Atom("P", (Const("c"),)), Equals(x, Const("c")))


def test_primes_in_identifiers():
    assert parse_formula("V'(x,y)") == Atom("V'", (x, y))


def test_syntax_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("forall x. (P(x)")
    assert err.value.position == len("forall x. (P(x)")


def test_unknown_symbol_with_vocabulary():
    with pytest.raises(UnknownSymbolError):
        parse_formula("R(x)", VOCAB)


def test_arity_mismatch_with_vocabulary():
    with pytest.raises(ArityError):
        parse_formula("E(x)", VOCAB)


def test_inconsistent_arity_without_vocabulary():
    with pytest.raises(ArityError):
        parse_formula("E(x) & E(x,y)")


# ----------------------------------------------------------------- printer


def test_print_dep():
    assert print_formula(Dep((x, y))) == "dep(x,y)"


def test_print_slashed():
    assert print_formula(Exists("x", Equals(x, y), frozenset({"y"}))) == "exists x/{y}. x=y"


def test_print_forall_disjunction():
    f = Forall("x", Or(Atom("P", (x,)), NegAtom("P", (x,))))
    assert print_formula(f) == "forall x. (P(x) | !P(x))"


def test_print_not_equals():
    assert print_formula(NotEquals(x, x)) == "!(x=x)"


@pytest.mark.parametrize("name,f", CORPUS, ids=[n for n, _ in CORPUS])
def test_corpus_round_trip(name, f):
    assert parse_formula(print_formula(f), constants=constant_symbols(f)) == f


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32), depth=st.integers(0, 5), kind=st.sampled_from(["d2", "if2", "fo2"]))
def test_round_trip_random(seed, depth, kind):
    f = random_formula(random.Random(seed), depth, kind)
    assert parse_formula(print_formula(f)) == f


def test_so_sentence_round_trip():
    text = "exists-rel R1/2 . exists-rel R2/0 . forall x. exists<=1 y. (R1(x,y) | R2())"
    s = parse_so_sentence(text)
    assert s.prefix == (("R1", 2), ("R2", 0))
    assert parse_so_sentence(print_so_sentence(s)) == s


def test_so_sentence_rejects_dependence_in_matrix():
    with pytest.raises(FragmentError):
        SOSentence((), Dep((x,)))


# ------------------------------------------------------------ free variables


def test_free_vars_dep():
    assert free_vars(parse_formula("dep(x,y)")) == {"x", "y"}


def test_free_vars_slash_counts_slashed_variables():
    assert free_vars(parse_formula("exists y/{x}. x=y")) == {"x"}
    assert free_vars(parse_formula("exists x/{y}. P(x)")) == {"y"}


def test_free_vars_sentence():
    assert free_vars(parse_formula("forall x. forall y. P(x)")) == frozenset()


def _reference_free_vars(f):
    if isinstance(f, (Equals, NotEquals)):
        return {t.name for t in (f.left, f.right) if isinstance(t, Var)}
    if isinstance(f, (Atom, NegAtom, Dep, NegDep)):
        return {t.name for t in f.args if isinstance(t, Var)}
    if isinstance(f, (And, Or)):
        return _reference_free_vars(f.left) | _reference_free_vars(f.right)
    if isinstance(f, Exists):
        return set(f.slash) | (_reference_free_vars(f.body) - {f.var})
    return _reference_free_vars(f.body) - {f.var}


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32), depth=st.integers(0, 5), kind=st.sampled_from(["d2", "if2", "fo2"]))
def test_free_vars_matches_reference(seed, depth, kind):
    f = random_formula(random.Random(seed), depth, kind)
    assert free_vars(f) == _reference_free_vars(f)


# ----------------------------------------------------------- classification


def test_classify_le_card_is_d2():
    assert Fragment.D2 in classify_fragment(parse_formula("forall x. exists y. (dep(y,x) & (!P(x) | Q(y)))"))


def test_classify_slashed_is_if2_not_d2():
    tags = classify_fragment(parse_formula("exists x/{y}. x=y"))
    assert Fragment.IF2 in tags and Fragment.D2 not in tags


def test_classify_three_variables():
    tags = classify_fragment(parse_formula("exists z. x=z"))
    assert Fragment.D3 in tags and Fragment.FO in tags and Fragment.D2 not in tags


def test_classify_counting():
    tags = classify_fragment(parse_formula("forall x. exists<=1 y. E(x,y)"))
    assert Fragment.FOC2 in tags and Fragment.FO2 not in tags


def test_classify_three_place_dep_is_not_d2():
    assert Fragment.D2 not in classify_fragment(parse_formula("dep(x,y,x)"))


# --------------------------------------------------------------------- NNF


def _is_nnf(f) -> bool:
    return all(type(n) in (Equals, NotEquals, Atom, NegAtom, Dep, NegDep, And, Or, Exists, Forall, CountExists) for n in walk(f))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32), kind=st.sampled_from(["d2", "if2", "fo2"]))
def test_negation_stays_in_nnf(seed, kind):
    f = random_formula(random.Random(seed), 4, kind)
    if kind == "d2":
        return
    g = negate(f)
    assert _is_nnf(g)
    if kind == "fo2":
        assert negate(g) == f

"""Weighted distance logic: semantics, fragments, and both translations."""

import random
from fractions import Fraction

import pytest

from conftest import wd
from watl import rdl, sampling
from watl.errors import DomainError, FragmentError, WatlError
from watl.fixtures import average_cost_sentence, squared_length_sentence
from watl.monoids import monoid_from_id
from watl.transform import NivatTriple, nivat_eval
from watl.weights import INF
from watl.wrdl import (
    And,
    Bool,
    CanonicalSentence,
    Const,
    ExistsFO,
    ExistsSO,
    Forall,
    Or,
    canonicalize,
    nivat_to_sentence,
    parse_wrdl,
    sentence_to_nivat,
    to_step_function,
    to_text,
    wrdl_classify,
    wrdl_eval,
)

SUM0 = monoid_from_id("sum0")
AVG0 = monoid_from_id("avg0")


def length_cap(triple, canonical):
    """Keep the subset enumeration of the translated sentence tractable."""
    k = len(triple.gamma) + len(canonical.so_vars)
    if k >= 6:
        return 1
    if k >= 4:
        return 2
    return 3


# --- parsing ---------------------------------------------------------------


def test_parse_nested_universals():
    formula = parse_wrdl("all x.(0, all y.(0, 1))", SUM0)
    assert formula == Forall("x", Const(Fraction(0)),
                             Forall("y", Const(Fraction(0)), Const(Fraction(1))))


def test_boolean_payloads_must_stay_in_the_past_fragment():
    with pytest.raises(FragmentError):
        parse_wrdl("B(EX X. dpast[<2](X,x))", SUM0)


def test_parse_disjunction_with_a_constant():
    formula = parse_wrdl("1/2 | B(P[a](x))", SUM0)
    assert isinstance(formula, Or)
    assert formula.left == Const(Fraction(1, 2))
    assert isinstance(formula.right, Bool)


def test_printed_formulas_reparse_equal():
    texts = [
        "all x.((B(P[a](x)) & 1) | (B(P[b](x)) & 2), 0)",
        "EX Y. ex x. (B(Y(x)) & 3/2)",
        "B(ex x. P[a](x)) | 5",
    ]
    for text in texts:
        formula = parse_wrdl(text, SUM0)
        assert parse_wrdl(to_text(formula), SUM0) == formula


# --- evaluation ------------------------------------------------------------


def test_nested_universals_square_the_length():
    sentence = squared_length_sentence()
    assert wrdl_eval(sentence, wd(("a", 1), ("a", 2), ("a", 1)), SUM0) == 9


def test_squared_length_holds_up_to_length_five():
    sentence = squared_length_sentence()
    rng = random.Random(3)
    for n in range(1, 6):
        word = sampling.random_word(rng, ("a", "b"), max_len=n, min_len=n)
        assert wrdl_eval(sentence, word, SUM0) == n * n


def test_average_cost_sentence_measures_the_average():
    sentence = average_cost_sentence()
    # (1*1 + 0 + 2*1 + 1) / 2 = 2
    assert wrdl_eval(sentence, wd(("a", 1), ("b", 1)), AVG0) == 2


def test_boolean_subformulas_gate_between_unit_and_zero():
    has_a = Bool(rdl.parse_rdl("ex x. P[a](x)"))
    assert wrdl_eval(has_a, wd(("a", 1)), SUM0) == SUM0.one
    assert wrdl_eval(has_a, wd(("b", 1)), SUM0) is INF


def test_constants_evaluate_to_themselves():
    assert wrdl_eval(Const(Fraction(5)), wd(("b", 2)), SUM0) == 5


def test_existential_folds_with_plus():
    # cheapest position wins under the min-plus monoid
    formula = ExistsFO("x", Or(
        And(Bool(rdl.parse_rdl("P[a](x)")), Const(Fraction(5))),
        And(Bool(rdl.parse_rdl("P[b](x)")), Const(Fraction(3)))))
    assert wrdl_eval(formula, wd(("a", 1), ("b", 1)), SUM0) == 3
    assert wrdl_eval(formula, wd(("a", 1), ("a", 1)), SUM0) == 5


def test_conjunction_multiplies_with_diamond():
    formula = And(Const(Fraction(2)), Const(Fraction(3)))
    assert wrdl_eval(formula, wd(("a", 1)), SUM0) == 5


def test_set_quantification_sums_over_subsets():
    # charge 1 per selected position, zero selections are allowed
    member = Bool(rdl.parse_rdl("Y(x)"))
    body = Forall("x", Or(And(member, Const(Fraction(1))),
                          And(Bool(rdl.parse_rdl("!Y(x)")), Const(Fraction(0)))),
                  Const(Fraction(0)))
    formula = ExistsSO("Y", body)
    assert wrdl_eval(formula, wd(("a", 2), ("a", 3)), SUM0) == 0


def test_sentences_ignore_the_assignment():
    sentence = average_cost_sentence()
    rng = random.Random(27)
    for _ in range(15):
        word = sampling.random_word(rng, ("a", "b"), max_len=3)
        sigma = sampling.random_assignment(rng, word, ("q",), ("Q",))
        assert wrdl_eval(sentence, word, SUM0, sigma) == wrdl_eval(sentence, word, SUM0)


def test_evaluation_requires_a_product_monoid():
    with pytest.raises(DomainError, match="product valuation"):
        wrdl_eval(Const(Fraction(1)), wd(("a", 1)), monoid_from_id("sum"))


def test_unbound_variables_are_reported():
    formula = Bool(rdl.parse_rdl("P[a](x)"))
    with pytest.raises(WatlError, match="x"):
        wrdl_eval(formula, wd(("a", 1)), SUM0)


# --- classification --------------------------------------------------------


def test_average_cost_sentence_is_syntactically_restricted():
    report = wrdl_classify(average_cost_sentence())
    assert report.is_sentence
    assert report.syntactically_restricted


def test_squared_length_sentence_is_not_restricted():
    report = wrdl_classify(squared_length_sentence())
    assert report.is_sentence
    assert not report.syntactically_restricted


def test_bare_constants_are_not_restricted():
    report = wrdl_classify(Const(Fraction(5)))
    assert not report.syntactically_restricted
    assert report.almost_boolean


# --- step functions ---------------------------------------------------------


def test_constant_step_function_has_one_branch():
    step = to_step_function(Const(Fraction(4)), SUM0)
    assert [value for _, value in step.branches] == [Fraction(4)]


def test_boolean_step_function_splits_on_the_guard():
    step = to_step_function(Bool(rdl.parse_rdl("P[a](x)")), SUM0)
    assert sorted(value for _, value in step.branches) == [SUM0.one, SUM0.zero]


def test_disjunction_refines_both_families():
    formula = Or(Bool(rdl.parse_rdl("P[a](x)")), Const(Fraction(2)))
    step = to_step_function(formula, SUM0)
    assert sorted(value for _, value in step.branches) == [SUM0.one, Fraction(2)]


def test_step_functions_are_exclusive_exhaustive_and_exact():
    rng = random.Random(40)
    formulas = [
        Or(Bool(rdl.parse_rdl("P[a](x)")), Const(Fraction(2))),
        And(Or(Const(Fraction(1)), Bool(rdl.parse_rdl("P[b](x)"))),
            Bool(rdl.parse_rdl("dpast[<=2](Y,x)"))),
    ]
    for formula in formulas:
        step = to_step_function(formula, SUM0)
        for _ in range(25):
            word = sampling.random_word(rng, ("a", "b"), max_len=4)
            sigma = sampling.random_assignment(rng, word, ("x",), ("Y",))
            holding = [value for guard, value in step.branches
                       if rdl.model_check(guard, word, sigma)]
            assert len(holding) == 1
            assert holding[0] == wrdl_eval(formula, word, SUM0, sigma)


def test_step_functions_reject_quantified_formulas():
    with pytest.raises(FragmentError):
        to_step_function(ExistsFO("x", Const(Fraction(1))), SUM0)


# --- canonical form ---------------------------------------------------------


def test_canonical_form_preserves_the_average_cost_semantics():
    sentence = average_cost_sentence()
    canonical = canonicalize(sentence, SUM0)
    formula = canonical.to_formula()
    assert wrdl_classify(formula).syntactically_restricted
    rng = random.Random(50)
    for _ in range(25):
        word = sampling.random_word(rng, ("a", "b"), max_len=4)
        assert wrdl_eval(formula, word, SUM0) == wrdl_eval(sentence, word, SUM0)
        assert canonical.check_family(word)


def test_canonical_boolean_uses_the_unit_and_zero_pair():
    sentence = Bool(rdl.parse_rdl("ex x. P[a](x)"))
    canonical = canonicalize(sentence, SUM0)
    branches = sorted(zip(canonical.left, canonical.right))
    assert branches == [(SUM0.one, SUM0.one), (SUM0.one, SUM0.zero)]
    assert wrdl_eval(canonical.to_formula(), wd(("a", 2)), SUM0) == SUM0.one
    assert wrdl_eval(canonical.to_formula(), wd(("b", 2)), SUM0) is INF


def test_canonicalization_is_semantically_idempotent():
    # signed refinement squares the guard family, so keep it small
    sentence = Bool(rdl.parse_rdl("ex x. P[a](x)"))
    once = canonicalize(sentence, SUM0)
    twice = canonicalize(once.to_formula(), SUM0)
    rng = random.Random(58)
    for _ in range(15):
        word = sampling.random_word(rng, ("a", "b"), max_len=3)
        assert wrdl_eval(once.to_formula(), word, SUM0) == \
            wrdl_eval(twice.to_formula(), word, SUM0)


def test_canonicalize_rejects_unrestricted_input():
    with pytest.raises(FragmentError):
        canonicalize(squared_length_sentence(), SUM0)


# --- sentence to triple -----------------------------------------------------


def test_triple_alphabet_is_the_weight_cartesian_product():
    canonical = canonicalize(average_cost_sentence(), SUM0)
    triple = sentence_to_nivat(canonical, ("a", "b"), SUM0)
    finite_left = sorted(set(v for v in canonical.left if v is not INF))
    finite_right = sorted(set(v for v in canonical.right if v is not INF))
    assert finite_left == [Fraction(1), Fraction(2)]
    assert finite_right == [Fraction(0), Fraction(1)]
    assert len(triple.gamma) == 2 * len(finite_left) * len(finite_right)
    assert triple.language_class == "sentence"
    assert rdl.classify(triple.language).exists_rdl_past_sentence


def test_single_branch_triples_realize_the_closed_form():
    sentence = Forall("x", Const(Fraction(2)), Const(Fraction(3)))
    canonical = canonicalize(sentence, SUM0)
    triple = sentence_to_nivat(canonical, ("a",), SUM0)
    assert len(triple.gamma) == 1
    rng = random.Random(61)
    for _ in range(20):
        word = sampling.random_word(rng, ("a",), max_len=4)
        expected = 2 * word.duration + 3 * len(word.entries)
        assert nivat_eval(triple, word, SUM0) == expected


def test_triple_evaluation_matches_the_sentence():
    canonical = canonicalize(average_cost_sentence(), SUM0)
    triple = sentence_to_nivat(canonical, ("a", "b"), SUM0)
    rng = random.Random(62)
    for _ in range(25):
        word = sampling.random_word(rng, ("a", "b"), max_len=1)
        assert nivat_eval(triple, word, SUM0) == \
            wrdl_eval(average_cost_sentence(), word, SUM0)


# --- triple to sentence -----------------------------------------------------


def all_words_sentence():
    return rdl.parse_rdl("!(ex y. !(y <= y))")


def test_translated_triples_are_syntactically_restricted():
    g = {"a": (Fraction(1), Fraction(0)), "b": (Fraction(2), Fraction(0))}
    triple = NivatTriple(("a", "b"), {"a": "a", "b": "b"}, g,
                         all_words_sentence(), "sentence")
    sentence = nivat_to_sentence(triple, SUM0)
    assert wrdl_classify(sentence).syntactically_restricted


def test_identity_triples_evaluate_the_letter_valuation():
    g = {"a": (Fraction(1), Fraction(2)), "b": (Fraction(3), Fraction(0))}
    triple = NivatTriple(("a", "b"), {"a": "a", "b": "b"}, g,
                         all_words_sentence(), "sentence")
    sentence = nivat_to_sentence(triple, SUM0)
    rng = random.Random(70)
    for _ in range(20):
        word = sampling.random_word(rng, ("a", "b"), max_len=2)
        expected = sum(g[letter][0] * delay + g[letter][1]
                       for letter, delay in word.entries)
        assert wrdl_eval(sentence, word, SUM0) == expected
        assert nivat_eval(triple, word, SUM0) == expected


def test_round_trip_through_the_triple_preserves_semantics():
    sentence = average_cost_sentence()
    canonical = canonicalize(sentence, SUM0)
    triple = sentence_to_nivat(canonical, ("a", "b"), SUM0)
    back = nivat_to_sentence(triple, SUM0)
    assert wrdl_classify(back).syntactically_restricted
    rng = random.Random(71)
    for _ in range(25):
        word = sampling.random_word(rng, ("a", "b"), max_len=1)
        assert wrdl_eval(back, word, SUM0) == wrdl_eval(sentence, word, SUM0)


def test_translations_agree_on_sampled_restricted_sentences():
    rng = random.Random(20260814)
    for _ in range(10):
        alphabet = ("a",) if rng.random() < 0.5 else ("a", "b")
        sentence = sampling.random_restricted_sentence(rng, alphabet)
        canonical = canonicalize(sentence, SUM0)
        triple = sentence_to_nivat(canonical, alphabet, SUM0)
        back = nivat_to_sentence(triple, SUM0)
        cap = length_cap(triple, canonical)
        for _ in range(20):
            word = sampling.random_word(rng, alphabet, max_len=cap)
            direct = wrdl_eval(sentence, word, SUM0)
            assert wrdl_eval(canonical.to_formula(), word, SUM0) == direct
            assert nivat_eval(triple, word, SUM0) == direct
            assert wrdl_eval(back, word, SUM0) == direct

import inflect
import pytest
from hypothesis import given, settings, strategies as st

from morphotype.formula_syntax import ForbiddenConArgument, NotANumeral, parse_formula
from morphotype.quantifier_composition import (CompositionRejection, SelfComposition, analyze_self_composition,
                                               eval_numeral, serialize_conc, tokenize)

ENGINE = inflect.engine()


def _spelled(n):
    return ENGINE.number_to_words(n, andword='').replace(',', '').replace('-', ' ')


def test_tokenize_groups_multiword_operators(english_lexicon):
    assert tokenize('more than as many as eight, nine', english_lexicon) == \
        ['more than', 'as many as', 'eight', ',', 'nine']


# ---------------------------------------------------------------------------
# Numerals
# ---------------------------------------------------------------------------

def test_implicit_addition(english_lexicon):
    composition = eval_numeral('eight thousand seven hundred fifty four', english_lexicon)
    assert composition.render() == '8(1000)+7(100)+50+4'
    assert composition.value == 8754


def test_word_list_input(english_lexicon):
    assert eval_numeral(['twenty', 'one'], english_lexicon).value == 21


def test_zero(english_lexicon):
    assert eval_numeral('zero', english_lexicon).value == 0


def test_bound_operators_have_no_value(english_lexicon):
    composition = eval_numeral('more than as many as eight thousand seven hundred fifty four', english_lexicon)
    assert composition.render() == 'MT(AMA(8(1000)+7(100)+50+4))'
    assert composition.value is None


@settings(max_examples=1000, deadline=None)
@given(st.integers(min_value=0, max_value=999_999))
def test_agrees_with_spelled_out_numbers(english_lexicon, n):
    assert eval_numeral(_spelled(n), english_lexicon).value == n


@pytest.mark.parametrize('text, reason', [
    ('two plus three', 'arithmetic'),
    ('eight more than', 'must precede'),
    ('thousand', 'needs a number'),
    ('more than', 'without a numeral'),
    ('eight dogs', 'not a numeral'),
])
def test_not_a_numeral(english_lexicon, text, reason):
    with pytest.raises(NotANumeral, match=reason):
        eval_numeral(text, english_lexicon)


# ---------------------------------------------------------------------------
# Self-compositions
# ---------------------------------------------------------------------------

def test_quantifier_run_is_a_self_composition(english_lexicon, english_rules):
    result = analyze_self_composition('more than as many as eight thousand seven hundred fifty four',
                                      english_lexicon, english_rules)
    assert isinstance(result, SelfComposition)
    assert result.base_type == 'Q'
    assert len(result.members) == 8
    assert result.order == 7
    assert result.pausal_break is None


def test_pausal_punctuation_breaks_a_composition(english_lexicon, english_rules):
    result = analyze_self_composition('an irrelevantly iridescent, small, blue acorn',
                                      english_lexicon, english_rules)
    assert isinstance(result, CompositionRejection)
    assert result.position == 3
    assert 'pausal break' in result.reason


def test_mixed_types(english_lexicon, english_rules):
    result = analyze_self_composition(['the man', 'eight'], english_lexicon, english_rules)
    assert isinstance(result, CompositionRejection)
    assert result.reason.startswith('mixed types')
    assert result.position == 1


def test_member_must_be_a_constituent(english_lexicon, english_rules):
    result = analyze_self_composition(['the man ill'], english_lexicon, english_rules)
    assert isinstance(result, CompositionRejection)
    assert result.position == 0


def test_order_is_one_less_than_the_member_count(english_lexicon, english_rules):
    assert analyze_self_composition(['the man', 'every man'], english_lexicon, english_rules).order == 1
    assert analyze_self_composition(['eight'], english_lexicon, english_rules).order == 0
    assert analyze_self_composition([], english_lexicon, english_rules).order == 0


# ---------------------------------------------------------------------------
# Connective compositions
# ---------------------------------------------------------------------------

def test_serialize_nested_connectives(english_lexicon, english_rules):
    words = serialize_conc(parse_formula('AND(AND(man,nut),OR(box,stone))'), english_lexicon, english_rules)
    assert words == ['man', 'and', 'nut', 'and', 'box', 'or', 'stone']


def test_non_connective_is_realized(english_lexicon, english_rules):
    assert serialize_conc(parse_formula('THE(man)'), english_lexicon, english_rules) == ['the', 'man']


@pytest.mark.parametrize('text', ['AND(Y,man)', 'AND(man,AND)'])
def test_connective_cannot_take_markers_or_connectives(english_lexicon, english_rules, text):
    with pytest.raises(ForbiddenConArgument):
        serialize_conc(parse_formula(text), english_lexicon, english_rules)

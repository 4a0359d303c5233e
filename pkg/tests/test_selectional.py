import pytest

from morphotype.formula_syntax import ArityMismatch, MissingTags, parse_formula
from morphotype.selectional import CoercionFailure, CoercionRecord, argument_head, check_restrictions, coerce


@pytest.mark.parametrize('text', [
    'RED_{P}(spruce)',
    'RED_{P}(THE(man))',  # A < P
    'READ_{I,S}(ideas,book)',
    'RED(noise)',
])
def test_satisfied(english_lexicon, text):
    assert check_restrictions(parse_formula(text), english_lexicon).satisfied


def test_violation(english_lexicon):
    verdict = check_restrictions(parse_formula('RED_{P}(noise)'), english_lexicon)
    [violation] = verdict.violations
    assert violation.argument == 'noise'
    assert violation.found == {'S'}
    assert violation.describe() == 'RED_{P} slot 1 needs P, noise has S'


def test_each_slot_is_checked(english_lexicon):
    verdict = check_restrictions(parse_formula('READ_{I,S}(book,ideas)'), english_lexicon)
    assert [(v.position, v.required) for v in verdict.violations] == [(0, 'I'), (1, 'S')]


def test_nested_restrictions_are_found(english_lexicon):
    verdict = check_restrictions(parse_formula('THE(RED_{P}(noise))'), english_lexicon)
    assert len(verdict.violations) == 1


def test_argument_head_skips_wrappers(english_lexicon):
    assert argument_head(parse_formula('THE(spruce)'), english_lexicon).symbol.text == 'spruce'
    assert argument_head(parse_formula('(GEN(he))(box)'), english_lexicon).symbol.text == 'box'


def test_untagged_argument(english_lexicon):
    with pytest.raises(MissingTags):
        check_restrictions(parse_formula('RED_{P}(it)'), english_lexicon)


def test_more_restrictions_than_arguments(english_lexicon):
    with pytest.raises(ArityMismatch):
        check_restrictions(parse_formula('RED_{P,S}(spruce)'), english_lexicon)


def test_metaphor_coercion(english_lexicon):
    f = parse_formula('RED_{P}(ideas)')
    record = coerce(f, english_lexicon)
    assert isinstance(record, CoercionRecord)
    assert record.replaced_relation.text == 'RED'
    assert record.substituted_relation.text == 'COMMUNIST'
    assert record.target_tags == ('P',)
    assert record.interpretation_note == '⟦COMMUNIST(ideas)⟧ <: ⟦RED(ideas)⟧'


def test_coercion_leaves_the_formula_ill_restricted(english_lexicon):
    f = parse_formula('RED_{P}(ideas)')
    record = coerce(f, english_lexicon)
    assert record.original is f
    assert not check_restrictions(f, english_lexicon).satisfied


def test_coercion_inside_a_larger_formula(english_lexicon):
    record = coerce(parse_formula('THE(RED_{P}(ideas))'), english_lexicon)
    assert record.argument == parse_formula('ideas')
    assert record.original == parse_formula('THE(RED_{P}(ideas))')


def test_no_metaphor_for_the_relation(english_lexicon):
    outcome = coerce(parse_formula('GOOD_{A}(noise)'), english_lexicon)
    assert isinstance(outcome, CoercionFailure)
    assert 'GOOD' in outcome.reason


def test_nothing_to_coerce(english_lexicon):
    outcome = coerce(parse_formula('RED_{P}(spruce)'), english_lexicon)
    assert isinstance(outcome, CoercionFailure)
    assert outcome.reason.startswith('formula satisfies')

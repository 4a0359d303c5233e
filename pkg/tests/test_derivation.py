import os
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from morphotype.derivation import (COMPLETE, DISQUALIFIED_STAGE, DISQUALIFIED_SYNTAX, GROUPED_IN_CHAIN, adjudicate,
                                   derive, derive_discourse, evaluate_candidate, reading, realize, score, stage_chain,
                                   valuation_order)
from morphotype.formula_syntax import (Application, ArityMismatch, Atom, EmptyCandidateList, UnknownWord, atom,
                                       complex_subformulas, format_formula, parse_formula, subformulas)


def _candidates(path):
    labels, texts = [], []
    with open(path, encoding='utf-8') as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            label, _, text = line.partition(':')
            labels.append(label.strip())
            texts.append(text.strip())
    return labels, texts


@pytest.fixture(scope='module')
def know(data_dir):
    return dict(zip(*_candidates(os.path.join(data_dir, 'candidates_know.txt'))))


@pytest.fixture(scope='module')
def donkey(data_dir):
    return dict(zip(*_candidates(os.path.join(data_dir, 'candidates_donkey.txt'))))


def _derive(text, lex, rs):
    return derive(parse_formula(text), lex, rs)


# ---------------------------------------------------------------------------
# Valuation order
# ---------------------------------------------------------------------------

def test_valuation_order_goes_right_to_left():
    order = valuation_order(parse_formula('KNOW(THE(man),i)'))
    assert [format_formula(g) for g in order] == ['i', 'man', 'THE(man)', 'KNOW(THE(man),i)']


def test_complex_arguments_come_before_atoms():
    order = valuation_order(parse_formula('KNOW((WHO(ILL)(Y(BE)))(THE(man)),i)'))
    assert [format_formula(g) for g in order][:6] == ['man', 'THE(man)', 'BE', 'Y(BE)', 'ILL', 'WHO(ILL)']
    assert format_formula(order[-2]) == 'i'


def test_chains_are_read_inside_out():
    assert reading(parse_formula('Y(ILL(BE(who)))(KNOW(THE(man),i))')) == \
        parse_formula('Y(ILL(BE(who))(KNOW(THE(man),i)))')


leaves = st.sampled_from(['THE', 'man', 'KNOW', 'i', 'Y', 'BE']).map(atom)


def _applications(children):
    return st.builds(Application, children, st.lists(children, min_size=1, max_size=3).map(tuple))


@given(st.recursive(leaves, _applications, max_leaves=10))
def test_valuation_order_is_topological(f):
    order = valuation_order(f)
    position = {id(g): i for i, g in enumerate(order)}
    assert len(position) == len(order)
    for g in order:
        if isinstance(g, Application):
            assert all(position[id(arg)] < position[id(g)] for arg in g.args)
    atomic_heads = [g.head for g in complex_subformulas(f) if isinstance(g.head, Atom)]
    assert len(order) == len(subformulas(f)) - len(atomic_heads)


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

def test_determiner_phrase(english_lexicon, english_rules):
    d = _derive('THE(man)', english_lexicon, english_rules)
    assert [stage.expression for stage in d.stages] == [('man',), ('the', 'man')]
    assert stage_chain(d) == 'm > tm'
    assert d.complete and score(d) == 2


def test_atom_has_no_stages(english_lexicon, english_rules):
    d = _derive('man', english_lexicon, english_rules)
    assert d.stages == () and d.complete and d.score == 0


def test_best_reading(english_lexicon, english_rules, know):
    d = _derive(know['24'], english_lexicon, english_rules)
    assert stage_chain(d) == 'm > tm > tmw > tmwi > tmwwi > iktmwwi'
    assert stage_chain(d, abbreviated=False).endswith('i know the man who was ill')
    assert d.label() == 'Complete'
    assert d.score == 6


@pytest.mark.parametrize('label, expected', [('22', 5), ('23', 5), ('27', 3), ('29', 4)])
def test_scores_of_complete_readings(english_lexicon, english_rules, know, label, expected):
    d = _derive(know[label], english_lexicon, english_rules)
    assert d.status == COMPLETE
    assert d.score == expected


def test_chain_reading_skips_the_inner_stages(english_lexicon, english_rules, know):
    assert stage_chain(_derive(know['27'], english_lexicon, english_rules)) == 'i > iktm > iktmwwi'


@pytest.mark.parametrize('label, failed', [('25', 3), ('26', 3), ('28', 4)])
def test_disqualified_readings(english_lexicon, english_rules, know, label, failed):
    d = _derive(know[label], english_lexicon, english_rules)
    assert d.status == DISQUALIFIED_STAGE
    assert d.label() == f'DisqualifiedStage({failed})'


def test_bracketed_argument_in_a_chain_is_flagged(english_lexicon, english_rules, know):
    d = _derive(know['28'], english_lexicon, english_rules)
    assert d.stages[3].reason == GROUPED_IN_CHAIN


def test_final_stage_is_the_whole_expression(english_lexicon, english_rules, know):
    for label in ('22', '23', '24', '29'):
        f = parse_formula(know[label])
        d = derive(f, english_lexicon, english_rules)
        assert list(d.stages[-1].expression) == realize(f, english_lexicon, english_rules)
        assert d.score <= len(complex_subformulas(f)) + 1


def test_coindexed_donkey_sentence(english_lexicon, english_rules, donkey):
    d = _derive(donkey['33'], english_lexicon, english_rules)
    assert stage_chain(d) == 'f > ef > efbod > efbodho'
    assert d.complete


def test_misplaced_pronoun(english_lexicon, english_rules, donkey):
    d = _derive(donkey['35'], english_lexicon, english_rules)
    assert stage_chain(d) == 'f > ef > efbodh > efbodho'
    assert d.label() == 'DisqualifiedStage(3)'
    assert d.stages[2].ill_word == 'he'


def test_complex_co_argument_is_assumed(english_lexicon, english_rules, donkey):
    d = _derive(donkey['35'], english_lexicon, english_rules)
    assert [stage.assumed for stage in d.stages] == [False, False, True, False]
    assert not d.stages[2].well_typed


def test_assumed_stages_do_not_score(english_lexicon, english_rules):
    d = _derive('KNOW((THE(man)),(EV(farmer)))', english_lexicon, english_rules)
    assert stage_chain(d) == 'f > ef > eftm > efktm'
    assert d.complete
    assert [stage.assumed for stage in d.stages] == [False, False, True, False]
    assert d.score == 3


def _formula_lines(path):
    with open(path, encoding='utf-8') as handle:
        return [line.strip() for line in handle if line.strip() and not line.startswith('#')]


POSSESSIVE_CHAIN = ('box > boxes > 7644874b > lt7644874b > dlt7644874b > udlt7644874b > fudlt7644874b'
                    ' > mfudlt7644874b > hmfudlt7644874b > ohmfudlt7644874b > 8374874ohmfudlt7644874b'
                    ' > mt8374874ohmfudlt7644874bae')


def test_possessive_sequence(english_lexicon, english_rules, data_dir):
    [text] = _formula_lines(os.path.join(data_dir, 'possessive.txt'))
    d = derive(parse_formula(text), english_lexicon, english_rules)
    assert len(d.stages) == 12
    # box and boxes both abbreviate to "b"
    assert stage_chain(d) == POSSESSIVE_CHAIN


def _initials(stage):
    return Counter(word if word.isdigit() else word[0] for word in stage.expression)


def test_each_stage_extends_the_previous(english_lexicon, english_rules, know, donkey, data_dir):
    [possessive] = _formula_lines(os.path.join(data_dir, 'possessive.txt'))
    for text in (know['24'], donkey['33'], possessive):
        d = _derive(text, english_lexicon, english_rules)
        for before, after in zip(d.stages, d.stages[1:]):
            assert not _initials(before) - _initials(after), (before.expression, after.expression)


# ---------------------------------------------------------------------------
# Discourse
# ---------------------------------------------------------------------------

def test_discourse_is_derived_sentence_by_sentence(english_lexicon, english_rules, data_dir):
    formulas = [parse_formula(text) for text in _formula_lines(os.path.join(data_dir, 'discourse.txt'))]
    report = derive_discourse(formulas, english_lexicon, english_rules)
    assert len(report.derivations) == 2
    assert report.complete and report.label() == 'Complete'
    assert report.score == sum(d.score for d in report.derivations)
    assert report.derivations[1].stages[-1].expression == ('he', 'left')


def test_discourse_stops_at_an_ill_sentence(english_lexicon, english_rules, donkey):
    formulas = [parse_formula('THE(man)'), parse_formula(donkey['35'])]
    report = derive_discourse(formulas, english_lexicon, english_rules)
    assert report.failed_sentence == 2
    assert report.status == DISQUALIFIED_STAGE
    assert report.label() == 'DisqualifiedSentence(2): DisqualifiedStage(3)'


def test_empty_discourse(english_lexicon, english_rules):
    report = derive_discourse([], english_lexicon, english_rules)
    assert report.complete and report.score == 0


def test_unknown_symbol(english_lexicon, english_rules):
    with pytest.raises(UnknownWord):
        _derive('THE(dog)', english_lexicon, english_rules)


def test_wrong_number_of_arguments(english_lexicon, english_rules):
    with pytest.raises(ArityMismatch):
        _derive('THE(man,i)', english_lexicon, english_rules)


# ---------------------------------------------------------------------------
# Adjudication
# ---------------------------------------------------------------------------

def test_adjudicate_readings(english_lexicon, english_rules, know):
    labels, texts = list(know), list(know.values())
    result = adjudicate(texts, english_lexicon, english_rules, labels=labels)
    assert result.winners == ('24',)
    assert [item['label'] for item in result.ranking()][:3] == ['24', '22', '23']
    by_label = {item['label']: item for item in result.candidates}
    assert by_label['24']['rank'] == 1
    assert by_label['22']['rank'] == 2
    for label in ('30', '31', '32'):
        assert by_label[label]['status'] == DISQUALIFIED_SYNTAX
        assert by_label[label]['rank'] is None
    assert by_label['25']['stage'] == 3


def test_ties_share_the_win(english_lexicon, english_rules):
    result = adjudicate(['THE(man)', 'EV(man)'], english_lexicon, english_rules)
    assert result.winners == ('1', '2')


def test_no_candidates(english_lexicon, english_rules):
    with pytest.raises(EmptyCandidateList):
        adjudicate([], english_lexicon, english_rules)


def test_unknown_words_reject_a_candidate(english_lexicon, english_rules):
    item = evaluate_candidate(1, 'x', 'THE(dog)', english_lexicon, english_rules)
    assert item['status'] == 'rejected'
    assert 'dog' in item['reason']

import os

import pytest

from morphotype.anaphora_context import build_context, render_context, render_sentence_context, resolve_coreference
from morphotype.formula_syntax import IllTypedSentence, parse_formula

DONKEY = '(Y_f(OWN))(he_f,(Y_f(BEAT))(A(donkey_y),EV(farmer_f)))'


@pytest.fixture(scope='module')
def discourse(data_dir):
    with open(os.path.join(data_dir, 'discourse.txt'), encoding='utf-8') as handle:
        return [parse_formula(line.strip()) for line in handle if line.strip() and not line.startswith('#')]


def test_coindexed_atoms_form_chains(english_lexicon):
    report = resolve_coreference(parse_formula(DONKEY), english_lexicon)
    assert report.chain_texts() == {'f': ['Y_f', 'he_f', 'Y_f', 'farmer_f'], 'y': ['donkey_y']}
    assert report.unresolved == ()
    assert report.dummies == ()
    assert report.agreement == ()


def test_weather_it_is_a_dummy(english_lexicon):
    report = resolve_coreference(parse_formula('(Y_d(RAIN))(it_d)'), english_lexicon)
    assert [str(a.symbol) for a in report.dummies] == ['it_d']
    assert report.unresolved == ()


def test_bare_pronoun_is_unresolved(english_lexicon):
    report = resolve_coreference(parse_formula('(Y(LEAVE))(he)'), english_lexicon)
    assert [str(a.symbol) for a in report.unresolved] == ['he']


def test_marker_without_coindexed_argument(english_lexicon):
    report = resolve_coreference(parse_formula('(Y_z(LEAVE))(he_x)'), english_lexicon)
    [finding] = report.agreement
    assert finding['kind'] == 'agreement'
    assert finding['index'] == 'z'


def test_single_sentence_context(english_lexicon, english_rules):
    ctx = build_context([parse_formula('THE(man)')], english_lexicon, english_rules)
    assert render_context(ctx) == 'Γ = (man : man, the man : THE(man))'


def test_discourse_context(english_lexicon, english_rules, discourse):
    ctx = build_context(discourse, english_lexicon, english_rules)
    assert render_context(ctx) == (
        'Γ = (man : man, the man : THE(man), the man smiled : (Y_x(SMILE))(THE(man_x)), '
        '"the man smiled; he left" : (Y_x(SMILE))(THE(man_x)); '
        '(he : he_x, he left : (Y_x(LEAVE))(he_x)))')
    assert render_sentence_context(ctx, 2) == 'Γ_2 = (he : he_x, he left : (Y_x(LEAVE))(he_x))'
    assert ctx.sentences == ('the man smiled', 'he left')
    assert ctx.sentence_boundaries == (0, 3)


def test_judgements_depend_on_everything_before_them(english_lexicon, english_rules, discourse):
    ctx = build_context(discourse, english_lexicon, english_rules)
    for i, judgement in enumerate(ctx.judgements):
        assert judgement.dependencies == tuple(range(i))


def test_pronoun_is_resolved_across_sentences(english_lexicon, english_rules, discourse):
    ctx = build_context(discourse, english_lexicon, english_rules)
    assert ctx.coreference.unresolved == ()
    assert 'he_x' in ctx.coreference.chain_texts()['x']


def test_ill_typed_sentence_stops_the_context(english_lexicon, english_rules):
    bad = parse_formula('(Y_z(OWN))((Y_z(BEAT))(A(don_y),he_z),EV(fa_z))')
    with pytest.raises(IllTypedSentence) as info:
        build_context([parse_formula('THE(man)'), bad], english_lexicon, english_rules)
    assert info.value.index == 2


def test_empty_discourse(english_lexicon, english_rules):
    assert render_context(build_context([], english_lexicon, english_rules)) == 'Γ = ()'

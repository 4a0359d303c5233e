import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from morphotype.formula_syntax import (Application, Atom, FormulaSyntaxError, Symbol, atom, atoms,
                                       complex_subformulas, format_formula, parse_formula, subformulas, to_sigma)

WRITTEN = [
    'KNOW(WHO((Y(BE))(ill,THE(man))),i)',
    'KNOW((WHO((Y(BE))(ILL))(THE(man))),i)',
    'KNOW((WHO(ILL)(Y(BE)))(THE(man)),i)',
    'KNOW(WHO(Y((BE)(ILL))(THE(man))),i)',
    'Y(ILL(BE(who)))(KNOW((THE(man)),i))',
    '(Y(ILL(BE(who))))(KNOW((THE(man)),i))',
    '(Y_f(OWN))(he_f,(Y_f(BEAT))(A(donkey_y),EV(farmer_f)))',
    '(Y_d(RAIN))(it_d)',
    'READ_{I,S}_a(ideas,book)',
]


def test_parse_simple_application():
    f = parse_formula('THE(man)')
    assert f == Application(atom('THE'), (atom('man'),))
    assert [format_formula(g) for g in subformulas(f)] == ['THE(man)', 'THE', 'man']


def test_subscripts():
    f = parse_formula('READ_{I,S}_a(x)')
    assert f.head.symbol == Symbol('READ', 'a', ('I', 'S'))
    assert str(f.head.symbol) == 'READ_{I,S}_a'
    assert parse_formula('man_x').symbol.coref_index == 'x'


def test_subscripts_in_wrong_order():
    with pytest.raises(FormulaSyntaxError, match='restrictions must come before'):
        parse_formula('READ_a_{I}(x)')


def test_lowercase_restriction_is_rejected():
    with pytest.raises(FormulaSyntaxError):
        parse_formula('RED_{p}(x)')


def test_grouping_is_kept_but_not_compared():
    bare = parse_formula('KNOW(THE(man),i)')
    grouped = parse_formula('KNOW((THE(man)),i)')
    assert bare == grouped
    assert grouped.args[0].grouped and not bare.args[0].grouped
    assert format_formula(grouped) == 'KNOW((THE(man)),i)'


@pytest.mark.parametrize('text', WRITTEN)
def test_written_formulas_print_back_verbatim(text):
    assert format_formula(parse_formula(text)) == text


def test_curried_application_nests_heads():
    f = parse_formula('WHO(ILL)(Y(BE))')
    assert f.args == (parse_formula('Y(BE)'),)
    assert f.head == parse_formula('WHO(ILL)')


@pytest.mark.parametrize('text, message', [
    ('M(the)AN', 'juxtaposition'),
    ('KNOW(THE(man),i)Y(ILL(BE(who)))', 'juxtaposition'),
    ('KNOW(THE(man),i)(ILL(Y(BE)(who)))', 'tuple of arguments'),
    ('KNOW(THE(man),i)(Y(ILL(BE(who))))', 'tuple of arguments'),
    ('THE()', 'empty argument list'),
    ('THE(man', 'missing'),
    ('THE(man))', 'unbalanced'),
    ('THE(man;)', 'stray character'),
    ('', 'empty formula'),
])
def test_syntax_errors(text, message):
    with pytest.raises(FormulaSyntaxError, match=message) as info:
        parse_formula(text)
    start, end = info.value.span
    assert 0 <= start <= end <= len(text)


def test_tuple_error_points_at_the_tuple():
    text = 'KNOW(THE(man),i)(ILL(Y(BE)(who)))'
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    start, end = info.value.span
    assert text[start:end] == '(THE(man),i)'


def test_sigma_rendering():
    assert to_sigma(parse_formula('THE(man)')) == 'Σ(THE, man)'
    assert to_sigma(parse_formula('KNOW(THE(man),i)')) == 'Σ(KNOW, Σ(THE, man), i)'


def test_atoms_and_complex_subformulas():
    f = parse_formula('KNOW((WHO(ILL)(Y(BE)))(THE(man)),i)')
    assert [str(a.symbol) for a in atoms(f)] == ['KNOW', 'WHO', 'ILL', 'Y', 'BE', 'THE', 'man', 'i']
    assert len(complex_subformulas(f)) == 6


def test_application_needs_arguments():
    with pytest.raises(ValueError):
        Application(atom('THE'), ())


def test_symbol_validation():
    with pytest.raises(ValueError):
        Symbol('has space')
    with pytest.raises(ValueError):
        Symbol('man', 'X')


@pytest.mark.parametrize('text, case_class', [
    ('man', 'lower'),
    ('7644874', 'lower'),
    ('he', 'lower'),
    ('THE', 'upper'),
    ('S-CON', 'upper'),
])
def test_case_class(text, case_class):
    assert Symbol(text).case_class == case_class


# ---------------------------------------------------------------------------
# Round trip
# ---------------------------------------------------------------------------

symbols = st.builds(
    Symbol,
    st.sampled_from(['THE', 'man', 'KNOW', 'i', 'Y', 'BE', 'ILL', 'who', 'S-CON', '8374874']),
    st.one_of(st.none(), st.sampled_from(['x', 'f', 'y2'])),
    st.sampled_from([(), ('P',), ('I', 'S')]),
)
atom_formulas = st.builds(Atom, symbols, grouped=st.booleans())


def _applications(children):
    return st.builds(Application, children, st.lists(children, min_size=1, max_size=3).map(tuple),
                     grouped=st.booleans())


formulas = st.recursive(atom_formulas, _applications, max_leaves=12)


@settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(formulas)
def test_parse_format_round_trip(f):
    text = format_formula(f)
    again = parse_formula(text)
    assert again == f
    assert format_formula(again) == text

"""
Morphotype - Quantifier Composition

Numeral compositions with implicit addition (`eight thousand seven
hundred fifty four` = 8(1000)+7(100)+50+4), quantifier operators bound
around them (MT(AMA(...))), self-compositions of a single type, and the
serialization of connective compositions.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from pyparsing import Regex

from morphotype.formula_syntax import Application, Atom, ForbiddenConArgument, Formula, NotANumeral
from morphotype.lexicon import Lexicon, LexiconEntry, entries_for_symbol, lookup
from morphotype.type_system import RuleSet, check_well_typed, close_types, minimal_types
from morphotype.derivation import realize

logger = logging.getLogger(__name__)

PAUSAL_PUNCTUATION = frozenset({'.', ',', ';', ':', '–'})
FORBIDDEN_CON_ARGUMENTS = ('CON', 'Y', 'CAS')

_WORD = Regex(r"[.,;:–]|[^\s.,;:–]+")


def tokenize(text: str, lex: Lexicon) -> List[str]:
    """Words and pausal punctuation; multiword lexicon surfaces (`more than`) become one token."""
    raw = [match[0][0] for match in _WORD.scan_string(text)]
    tokens, i = [], 0
    while i < len(raw):
        for width in range(min(lex.max_words, len(raw) - i), 0, -1):
            candidate = ' '.join(raw[i:i + width])
            if width == 1 or lookup(lex, candidate):
                tokens.append(candidate)
                i += width
                break
    return tokens


# ---------------------------------------------------------------------------
# Numerals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int
    word: str = ''


@dataclass(frozen=True)
class Mul:
    left: 'Numeral'
    right: 'Numeral'


@dataclass(frozen=True)
class Add:
    parts: Tuple['Numeral', ...]


@dataclass(frozen=True)
class Bound:
    operator: str
    inner: 'Numeral'


Numeral = Union[Num, Mul, Add, Bound]


def render_numeral(n: Numeral) -> str:
    if isinstance(n, Num):
        return str(n.value)
    if isinstance(n, Mul):
        left = render_numeral(n.left)
        if isinstance(n.left, Add):
            left = f'({left})'
        return f'{left}({render_numeral(n.right)})'
    if isinstance(n, Add):
        return '+'.join(render_numeral(part) for part in n.parts)
    return f'{n.operator}({render_numeral(n.inner)})'


def numeral_value(n: Numeral) -> Optional[int]:
    """None as soon as a quantifier operator binds the numeral."""
    if isinstance(n, Num):
        return n.value
    if isinstance(n, Mul):
        return numeral_value(n.left) * numeral_value(n.right)
    if isinstance(n, Add):
        return sum(numeral_value(part) for part in n.parts)
    return None


@dataclass(frozen=True)
class NumeralComposition:
    tokens: Tuple[str, ...]
    structure: Numeral
    value: Optional[int]

    def render(self) -> str:
        return render_numeral(self.structure)


def _plus(left: Optional[Numeral], right: Numeral) -> Numeral:
    if left is None:
        return right
    parts = left.parts if isinstance(left, Add) else (left,)
    return Add(parts + (right,))


def _operator_symbol(surface: str, lex: Lexicon) -> str:
    for symbol, mapped in lex.symbols.items():
        if mapped == surface:
            return symbol
    return ''.join(word[0] for word in surface.split()).upper()


def _numeral_entry(token: str, lex: Lexicon) -> Optional[LexiconEntry]:
    return next((entry for entry in lookup(lex, token) if entry.value is not None), None)


def _operator_entry(token: str, lex: Lexicon) -> Optional[LexiconEntry]:
    return next((entry for entry in lookup(lex, token) if 'Q' in entry.type_names), None)


def eval_numeral(words: Union[str, Sequence[str]], lex: Lexicon) -> NumeralComposition:
    """Group units under scale words and add adjacent groups; leading operators bind the result."""
    text = words if isinstance(words, str) else ' '.join(words)
    tokens = tokenize(text.replace('-', ' '), lex)
    if not tokens:
        raise NotANumeral('', 'empty numeral')

    operators: List[str] = []
    groups: Optional[Numeral] = None
    current: Optional[Numeral] = None
    started = False
    for token in tokens:
        entry = _numeral_entry(token, lex)
        if entry is None:
            operator = _operator_entry(token, lex)
            if operator is None:
                raise NotANumeral(token)
            if 'arithmetic' in operator.flags:
                raise NotANumeral(token, 'arithmetic between numerals is an open problem and is not evaluated')
            if started:
                raise NotANumeral(token, 'a quantifier operator must precede the numeral it binds')
            operators.append(_operator_symbol(token, lex))
            continue

        started = True
        if 'scale' not in entry.flags:
            current = _plus(current, Num(entry.value, token))
        elif current is None:
            raise NotANumeral(token, f'{token!r} needs a number before it')
        elif entry.value == 100:
            current = Mul(current, Num(entry.value, token))
        else:
            groups = _plus(groups, Mul(current, Num(entry.value, token)))
            current = None

    if not started:
        raise NotANumeral(tokens[-1], 'quantifier operator without a numeral')
    structure = groups if current is None else _plus(groups, current)
    for operator in reversed(operators):
        structure = Bound(operator, structure)
    composition = NumeralComposition(tuple(tokens), structure, numeral_value(structure))
    logger.debug('%s -> %s', text, composition.render())
    return composition


# ---------------------------------------------------------------------------
# Self-compositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelfComposition:
    base_type: Optional[str]
    order: int
    members: Tuple[str, ...]
    pausal_break: Optional[int] = None


@dataclass(frozen=True)
class CompositionRejection:
    reason: str
    position: Optional[int] = None


def _pausal(token: str, lex: Lexicon) -> bool:
    return token in PAUSAL_PUNCTUATION or any('pausal_con' in entry.flags for entry in lookup(lex, token))


def analyze_self_composition(constituents: Union[str, Sequence[str]], lex: Lexicon,
                             rs: RuleSet) -> Union[SelfComposition, CompositionRejection]:
    """Accept a run of constituents sharing one type and free of pausal connectives.

    A plain string is split into constituents first. The order of an
    n-composition is n - 1.
    """
    members = tokenize(constituents, lex) if isinstance(constituents, str) else list(constituents)
    for position, member in enumerate(members):
        if _pausal(member, lex):
            return CompositionRejection(f'pausal break {member!r} at constituent {position + 1}', position)
    if not members:
        return SelfComposition(None, 0, ())

    common = None
    for position, member in enumerate(members):
        types = check_well_typed(member.split(), lex, rs).wf_types
        if not types:
            return CompositionRejection(f'{member!r} is not a constituent', position)
        closed = close_types(types, rs)
        common = closed if common is None else common & closed
        if not common:
            return CompositionRejection(f'mixed types: {member!r} shares no type with the constituents before it',
                                        position)
    base = minimal_types(common, rs)[0]
    return SelfComposition(base, len(members) - 1, tuple(members))


# ---------------------------------------------------------------------------
# Connective compositions
# ---------------------------------------------------------------------------

def _closed_types(a: Atom, lex: Lexicon, rs: RuleSet):
    names = set()
    for entry in entries_for_symbol(lex, a.symbol.text):
        names |= entry.type_names
    return close_types(names, rs)


def serialize_conc(c: Formula, lex: Lexicon, rs: RuleSet) -> List[str]:
    """CON(CON(A,A),CON(B,B)) -> A CON A CON B CON B; a CON never takes a CON, Y or CAS atom."""
    if isinstance(c, Application) and isinstance(c.head, Atom) and 'CON' in _closed_types(c.head, lex, rs):
        for arg in c.args:
            if isinstance(arg, Atom):
                closed = _closed_types(arg, lex, rs)
                for name in FORBIDDEN_CON_ARGUMENTS:
                    if name in closed:
                        raise ForbiddenConArgument(str(arg.symbol), name)
        connective = realize(c.head, lex, rs)
        parts = [serialize_conc(arg, lex, rs) for arg in c.args]
        if len(parts) == 1:
            return connective + parts[0]
        out = parts[0]
        for part in parts[1:]:
            out = out + connective + part
        return out
    return realize(c, lex, rs)

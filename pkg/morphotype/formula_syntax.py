"""
Morphotype - Formula Syntax

Tokenizes, parses and prints morphosyntactic formulas written in prefix
notation, e.g. `KNOW((WHO(ILL)(Y(BE)))(THE(man)),i)`.

Subscripts are ASCII: `man_x` carries coreference index `x`,
`READ_{I,S}` carries selectional restrictions, and `READ_{I,S}_a`
carries both (restrictions first).

Also home of the package's exception hierarchy.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

from pyparsing import Regex

logger = logging.getLogger(__name__)

Span = Tuple[int, int]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class MorphotypeError(Exception):
    """Base class for every error raised by the morphotype package."""


class FormulaSyntaxError(MorphotypeError):
    def __init__(self, message: str, span: Span):
        super().__init__(f'{message} (at {span[0]}-{span[1]})')
        self.message = message
        self.span = span


class PatternSyntaxError(MorphotypeError):
    def __init__(self, message: str, position: int):
        super().__init__(f'{message} (at {position})')
        self.message = message
        self.position = position


class LexiconParseError(MorphotypeError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f'line {line_no}: {message}')
        self.message = message
        self.line_no = line_no


class ArityConflict(MorphotypeError):
    def __init__(self, surface: str, arities: Tuple[int, ...]):
        super().__init__(f"'{surface}' declared with arities {sorted(set(arities))}")
        self.surface = surface
        self.arities = arities


class BadFlexeme(MorphotypeError):
    def __init__(self, surface: str, reason: str):
        super().__init__(f"'{surface}': {reason}")
        self.surface = surface
        self.reason = reason


class UnknownType(MorphotypeError):
    def __init__(self, name: str):
        super().__init__(f'undeclared type {name}')
        self.name = name


class UnknownWord(MorphotypeError):
    def __init__(self, surface: str):
        super().__init__(f"unknown word '{surface}'")
        self.surface = surface


class ArityMismatch(MorphotypeError):
    def __init__(self, symbol: str, expected: int, found: int):
        super().__init__(f'{symbol} takes {expected} argument(s), found {found}')
        self.symbol = symbol
        self.expected = expected
        self.found = found


class MissingTags(MorphotypeError):
    def __init__(self, symbol: str):
        super().__init__(f'{symbol} has no semantic tags to check against')
        self.symbol = symbol


class ForbiddenConArgument(MorphotypeError):
    def __init__(self, symbol: str, type_name: str):
        super().__init__(f'a connective cannot take {symbol} ({type_name}) as argument')
        self.symbol = symbol
        self.type_name = type_name


class NotANumeral(MorphotypeError):
    def __init__(self, word: str, reason: str = 'not a numeral or quantifier'):
        super().__init__(f"'{word}': {reason}")
        self.word = word
        self.reason = reason


class IllTypedSentence(MorphotypeError):
    def __init__(self, index: int, reason: str):
        super().__init__(f'sentence {index} is ill-typed: {reason}')
        self.index = index
        self.reason = reason


class EmptyCandidateList(MorphotypeError):
    def __init__(self):
        super().__init__('no candidate formulas given')


# ---------------------------------------------------------------------------
# Formula trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    text: str
    coref_index: Optional[str] = None
    restrictions: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.text or any(c in self.text for c in '(),_ \t\n'):
            raise ValueError(f'bad symbol text {self.text!r}')
        if self.coref_index is not None and not (self.coref_index.isalnum() and self.coref_index.islower()):
            raise ValueError(f'bad coreference index {self.coref_index!r}')
        for tag in self.restrictions:
            if not tag or not tag.isupper():
                raise ValueError(f'bad restriction tag {tag!r}')

    @property
    def case_class(self) -> str:
        # lower: 0th order relation (1st order argument); upper: higher order.
        # Digit strings such as 7644874 carry no case and are arguments.
        return 'upper' if any(c.isupper() for c in self.text) else 'lower'

    def __str__(self) -> str:
        out = self.text
        if self.restrictions:
            out += '_{' + ','.join(self.restrictions) + '}'
        if self.coref_index:
            out += '_' + self.coref_index
        return out


@dataclass(frozen=True)
class Atom:
    symbol: Symbol
    span: Optional[Span] = field(default=None, compare=False)
    grouped: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Application:
    head: 'Formula'
    args: Tuple['Formula', ...]
    span: Optional[Span] = field(default=None, compare=False)
    grouped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.args:
            raise ValueError('an application needs at least one argument')

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Atom, Application]


def atom(text: str, coref_index: Optional[str] = None, restrictions: Tuple[str, ...] = ()) -> Atom:
    """Shorthand used by tests and data builders."""
    return Atom(Symbol(text, coref_index, tuple(restrictions)))


def subformulas(f: Formula) -> List[Formula]:
    """Every subformula of f, preorder, f itself first."""
    out = [f]
    if isinstance(f, Application):
        out.extend(subformulas(f.head))
        for arg in f.args:
            out.extend(subformulas(arg))
    return out


def complex_subformulas(f: Formula) -> List[Formula]:
    return [g for g in subformulas(f) if isinstance(g, Application)]


def atoms(f: Formula) -> List[Atom]:
    return [g for g in subformulas(f) if isinstance(g, Atom)]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN = Regex(
    r"(?P<ident>[A-Za-z0-9][A-Za-z0-9\-]*)(?P<subs>(?:_(?:\{[^}]*\}?|[A-Za-z0-9]*))*)"
    r"|(?P<punct>[(),])"
)


@dataclass
class _Token:
    kind: str  # 'sym', '(', ')' or ','
    start: int
    end: int
    symbol: Optional[Symbol] = None


def _parse_subscripts(raw: str, start: int) -> Tuple[Optional[str], Tuple[str, ...]]:
    coref = None
    restrictions: Tuple[str, ...] = ()
    pos = 0
    parts = []
    while pos < len(raw):
        # raw always starts with '_' here
        if raw.startswith('_{', pos):
            close = raw.find('}', pos)
            if close < 0:
                raise FormulaSyntaxError('unterminated restriction subscript', (start + pos, start + len(raw)))
            parts.append(('restr', raw[pos + 2:close], start + pos, start + close + 1))
            pos = close + 1
        else:
            nxt = raw.find('_', pos + 1)
            nxt = len(raw) if nxt < 0 else nxt
            parts.append(('coref', raw[pos + 1:nxt], start + pos, start + nxt))
            pos = nxt

    kinds = [kind for kind, _, _, _ in parts]
    if kinds not in ([], ['restr'], ['coref'], ['restr', 'coref']):
        _, _, s, e = parts[-1]
        raise FormulaSyntaxError('malformed subscripts: restrictions must come before one coreference index', (s, e))

    for kind, body, s, e in parts:
        if kind == 'restr':
            tags = tuple(t.strip() for t in body.split(','))
            if not all(t and t.isalpha() and t.isupper() for t in tags):
                raise FormulaSyntaxError('restriction tags must be uppercase identifiers', (s, e))
            restrictions = tags
        else:
            if not (body and body.isalnum() and body.islower()):
                raise FormulaSyntaxError('coreference index must be a lowercase identifier', (s, e))
            coref = body
    return coref, restrictions


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    last = 0
    for result, start, end in _TOKEN.scan_string(text):
        gap = text[last:start]
        if gap.strip():
            offset = last + (len(gap) - len(gap.lstrip()))
            raise FormulaSyntaxError(f'stray character {text[offset]!r}', (offset, offset + 1))
        if result.get('punct'):
            tokens.append(_Token(result['punct'], start, end))
        else:
            ident = result['ident']
            coref, restrictions = _parse_subscripts(result.get('subs') or '', start + len(ident))
            tokens.append(_Token('sym', start, end, Symbol(ident, coref, restrictions)))
        last = end
    tail = text[last:]
    if tail.strip():
        offset = last + (len(tail) - len(tail.lstrip()))
        raise FormulaSyntaxError(f'stray character {text[offset]!r}', (offset, offset + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive descent over the token list.

    formula := primary arglist*
    primary := symbol | '(' formula ')'
    arglist := '(' formula (',' formula)* ')'
    """

    def __init__(self, text: str, tokens: List[_Token]):
        self.text = text
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def eof_span(self) -> Span:
        return (len(self.text), len(self.text))

    def formula(self) -> Formula:
        node = self.primary()
        start = node.span[0]
        arglists: List[Tuple[Tuple[Formula, ...], Span]] = []
        while self.peek() is not None and self.peek().kind == '(':
            args, span = self.arglist()
            arglists.append((args, span))
            node = Application(node, args, span=(start, span[1]))
        # F(a,b)(c): the tuple is not a formula, so nothing can be applied to it
        for args, span in arglists[:-1]:
            if len(args) > 1:
                raise FormulaSyntaxError('a tuple of arguments is not a formula', span)
        return node

    def primary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError('unbalanced parentheses: formula ends early', self.eof_span())
        if tok.kind == 'sym':
            self.take()
            return Atom(tok.symbol, span=(tok.start, tok.end))
        if tok.kind == '(':
            self.take()
            inner = self.formula()
            close = self.expect_close(tok)
            return replace(inner, span=(tok.start, close.end), grouped=True)
        if tok.kind == ')':
            raise FormulaSyntaxError("unbalanced parentheses: unexpected ')'", (tok.start, tok.end))
        raise FormulaSyntaxError("stray ','", (tok.start, tok.end))

    def arglist(self) -> Tuple[Tuple[Formula, ...], Span]:
        opening = self.take()
        nxt = self.peek()
        if nxt is not None and nxt.kind == ')':
            raise FormulaSyntaxError('empty argument list', (opening.start, nxt.end))
        args = [self.formula()]
        while self.peek() is not None and self.peek().kind == ',':
            self.take()
            args.append(self.formula())
        close = self.expect_close(opening)
        return tuple(args), (opening.start, close.end)

    def expect_close(self, opening: _Token) -> _Token:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unbalanced parentheses: missing ')'", (opening.start, len(self.text)))
        if tok.kind != ')':
            if tok.kind in ('sym', '('):
                raise FormulaSyntaxError('juxtaposition of two formulas without composition', (tok.start, tok.end))
            raise FormulaSyntaxError(f"expected ')' but found {tok.kind!r}", (tok.start, tok.end))
        return self.take()


def parse_formula(text: str) -> Formula:
    """Parse one formula; raise FormulaSyntaxError with a span on failure."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError('empty formula', (0, len(text)))
    parser = _Parser(text, tokens)
    f = parser.formula()
    leftover = parser.peek()
    if leftover is not None:
        span = (leftover.start, leftover.end)
        if leftover.kind in ('sym', '('):
            raise FormulaSyntaxError('juxtaposition of two formulas without composition', span)
        if leftover.kind == ')':
            raise FormulaSyntaxError("unbalanced parentheses: unexpected ')'", span)
        raise FormulaSyntaxError("stray ','", span)
    logger.debug('parsed %r into %d subformulas', text, len(subformulas(f)))
    return f


# ---------------------------------------------------------------------------
# Printers
# ---------------------------------------------------------------------------

def format_formula(f: Formula) -> str:
    """Canonical serialization; parse_formula(format_formula(f)) == f."""
    if isinstance(f, Atom):
        text = str(f.symbol)
    else:
        head = format_formula(f.head)
        if isinstance(f.head, Application) and len(f.head.args) > 1 and not f.head.grouped:
            head = f'({head})'
        text = head + '(' + ','.join(format_formula(arg) for arg in f.args) + ')'
    return f'({text})' if f.grouped else text


def to_sigma(f: Formula) -> str:
    """Render A(B) as Σ(A, B), recursively."""
    if isinstance(f, Atom):
        return str(f.symbol)
    parts = [to_sigma(f.head)] + [to_sigma(arg) for arg in f.args]
    return 'Σ(' + ', '.join(parts) + ')'

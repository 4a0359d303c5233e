"""
Morphotype - Lexicon

Loads per-language lexicon files binding surface forms (words and bound
morphemes such as `-s`) to morphosyntactic types, arities, semantic tags
and flags. Besides plain entries a lexicon file has four optional
sections:

- [symbols]    formula symbol -> surface (`EV = every`, `Y = -s`)
- [irregular]  fused forms (`man + Y = men`)
- [metaphor]   coercion map for relation symbols (`COMMUNIST -> RED`)
- [subtags]    semantic tag hierarchy (`P < ENTITY`)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, IO, List, Optional, Set, Tuple, Union

from morphotype.formula_syntax import ArityConflict, BadFlexeme, LexiconParseError

logger = logging.getLogger(__name__)

KNOWN_FLAGS = frozenset({'dummy_pronoun', 'pausal_con', 'pos_equivalent', 'scale', 'arithmetic'})
PLACES = ('before', 'after', 'infix')
SECTIONS = ('entries', 'symbols', 'irregular', 'metaphor', 'subtags')

# one alternative of a /-type; a plain entry has a single alternative
TypeAlternative = Tuple[str, ...]


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    language: str
    types: Tuple[TypeAlternative, ...]
    arity: int = 0
    semantic_tags: FrozenSet[str] = frozenset()
    flags: FrozenSet[str] = frozenset()
    open_tail: bool = False
    value: Optional[int] = None
    place: str = 'before'
    marker: Optional[str] = None  # inherently marked form, e.g. `is : Y(COP)`

    @property
    def is_flexeme(self) -> bool:
        return len(self.types) > 1 or self.open_tail

    @property
    def type_names(self) -> FrozenSet[str]:
        return frozenset(name for alternative in self.types for name in alternative)

    @property
    def is_bound(self) -> bool:
        return self.surface.startswith('-')

    def type_text(self) -> str:
        if self.is_flexeme:
            parts = [alt[0] if len(alt) == 1 else '(' + '|'.join(alt) + ')' for alt in self.types]
            if self.open_tail:
                parts.append('*')
            text = '/'.join(parts)
        else:
            text = ','.join(self.types[0])
        return f'{self.marker}({text})' if self.marker else text

    def to_line(self) -> str:
        surface = f'"{self.surface}"' if any(c in self.surface for c in ':;#"') else self.surface
        fields = [f'{surface} : {self.type_text()}', f'arity={self.arity}']
        if self.semantic_tags:
            fields.append('tags=' + ','.join(sorted(self.semantic_tags)))
        if self.flags:
            fields.append('flags=' + ','.join(sorted(self.flags)))
        if self.value is not None:
            fields.append(f'value={self.value}')
        if self.place != 'before':
            fields.append(f'place={self.place}')
        return ' ; '.join(fields)


@dataclass(frozen=True)
class FusedForm:
    """A surface analysed as stem + bound marker (`boxes` = box + Y)."""
    stem: str
    marker: str


@dataclass(frozen=True, eq=False)
class Lexicon:
    language: str
    entries: Dict[str, List[LexiconEntry]] = field(default_factory=dict)
    metaphor_map: Dict[str, str] = field(default_factory=dict)
    symbols: Dict[str, str] = field(default_factory=dict)
    irregular: Dict[Tuple[str, str], str] = field(default_factory=dict)
    subtags: Dict[str, FrozenSet[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return sum(len(group) for group in self.entries.values())

    @property
    def max_words(self) -> int:
        return max((len(surface.split()) for surface in self.entries), default=1)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _split_names(text: str, sep: str, line_no: int) -> Tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(sep))
    for name in names:
        if not name or not all(c.isalnum() or c == '-' for c in name):
            raise LexiconParseError(f'bad type name {name!r}', line_no)
    return names


def parse_type_expression(text: str, line_no: int = 0) -> Tuple[Tuple[TypeAlternative, ...], bool, Optional[str]]:
    """Parse `N`, `Yx,Yr`, `Y(COP)`, `X/R/*` or `ADV/(Q|D)`.

    Returns (alternatives, open_tail, marker).
    """
    text = text.strip()
    marker = None
    if '/' not in text and text.endswith(')') and '(' in text:
        marker, _, inner = text.partition('(')
        marker = _split_names(marker, ',', line_no)[0]
        text = inner[:-1]
    if '/' not in text:
        return (_split_names(text, ',', line_no),), False, marker

    alternatives: List[TypeAlternative] = []
    open_tail = False
    parts = [part.strip() for part in text.split('/')]
    for i, part in enumerate(parts):
        if part == '*':
            if i != len(parts) - 1:
                raise LexiconParseError("'*' must close a /-type", line_no)
            open_tail = True
        elif part.startswith('(') and part.endswith(')'):
            alternatives.append(_split_names(part[1:-1], '|', line_no))
        else:
            alternatives.append(_split_names(part, '|', line_no))
    return tuple(alternatives), open_tail, marker


def _parse_entry(line: str, language: str, line_no: int) -> LexiconEntry:
    if line.startswith('"'):
        close = line.find('"', 1)
        if close < 0:
            raise LexiconParseError('unterminated quoted surface', line_no)
        surface = line[1:close]
        rest = line[close + 1:].lstrip()
        if not rest.startswith(':'):
            raise LexiconParseError("expected ':' after surface", line_no)
        rest = rest[1:]
    else:
        surface, sep, rest = line.partition(':')
        surface = ' '.join(surface.split())
        if not sep or not surface:
            raise LexiconParseError("expected 'surface : TYPES'", line_no)

    type_text, *settings = [part.strip() for part in rest.split(';')]
    if not type_text:
        raise LexiconParseError(f"no types for '{surface}'", line_no)
    types, open_tail, marker = parse_type_expression(type_text, line_no)

    values: Dict[str, Any] = {'arity': 0, 'semantic_tags': frozenset(), 'flags': frozenset(),
                              'value': None, 'place': 'before'}
    for setting in settings:
        if not setting:
            continue
        key, sep, raw = (s.strip() for s in setting.partition('='))
        if not sep:
            raise LexiconParseError(f'expected key=value, got {setting!r}', line_no)
        if key in ('arity', 'value'):
            try:
                values[key] = int(raw)
            except ValueError:
                raise LexiconParseError(f'{key} must be an integer, got {raw!r}', line_no)
        elif key == 'tags':
            values['semantic_tags'] = frozenset(t.strip() for t in raw.split(',') if t.strip())
        elif key == 'flags':
            flags = frozenset(f.strip() for f in raw.split(',') if f.strip())
            unknown = flags - KNOWN_FLAGS
            if unknown:
                raise LexiconParseError(f'unknown flag(s) {sorted(unknown)}', line_no)
            values['flags'] = flags
        elif key == 'place':
            if raw not in PLACES:
                raise LexiconParseError(f'place must be one of {PLACES}', line_no)
            values['place'] = raw
        else:
            raise LexiconParseError(f'unknown setting {key!r}', line_no)

    if values['arity'] < 0:
        raise LexiconParseError('arity must be nonnegative', line_no)
    entry = LexiconEntry(surface, language, types, open_tail=open_tail, marker=marker, **values)
    if '/' in type_text and len(set(types)) != len(types):
        raise BadFlexeme(surface, 'a /-type lists an alternative twice')
    return entry


def load_lexicon(source: Union[str, bytes, IO]) -> Lexicon:
    """Load a lexicon from text, bytes or an open file."""
    if hasattr(source, 'read'):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode('utf-8')

    language = None
    section = None
    entries: Dict[str, List[LexiconEntry]] = {}
    symbols: Dict[str, str] = {}
    irregular: Dict[Tuple[str, str], str] = {}
    metaphor: Dict[str, str] = {}
    subtags: Dict[str, Set[str]] = {}

    for line_no, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        comment = line.find('#', line.find('"', 1) + 1 if line.startswith('"') else 0)
        if comment >= 0:
            line = line[:comment].strip()
        if not line:
            continue

        if section is None and language is None and line.startswith('language:'):
            language = line.partition(':')[2].strip()
            continue
        if line.startswith('[') and line.endswith(']'):
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise LexiconParseError(f'unknown section [{section}]', line_no)
            continue
        if language is None:
            raise LexiconParseError("missing 'language:' header", line_no)

        if section in (None, 'entries'):
            entry = _parse_entry(line, language, line_no)
            group = entries.setdefault(entry.surface, [])
            arities = {e.arity for e in group} | {entry.arity}
            if len(arities) > 1:
                raise ArityConflict(entry.surface, tuple(sorted(arities)))
            group.append(entry)
        elif section == 'symbols':
            sym, sep, surface = (s.strip() for s in line.partition('='))
            if not sep or not sym or not surface:
                raise LexiconParseError("expected 'SYMBOL = surface'", line_no)
            symbols[sym] = surface
        elif section == 'irregular':
            left, sep, fused = (s.strip() for s in line.partition('='))
            stem, plus, marker = (s.strip() for s in left.partition('+'))
            if not (sep and plus and stem and marker and fused):
                raise LexiconParseError("expected 'stem + MARKER = fused'", line_no)
            irregular[(stem, marker)] = fused
        elif section == 'metaphor':
            src, sep, dst = (s.strip() for s in line.partition('->'))
            if not sep or not src or not dst:
                raise LexiconParseError("expected 'SOURCE -> TARGET'", line_no)
            metaphor[src] = dst
        else:
            tag, sep, parents = (s.strip() for s in line.partition('<'))
            if not sep or not tag or not parents:
                raise LexiconParseError("expected 'TAG < PARENT[,PARENT]'", line_no)
            subtags.setdefault(tag, set()).update(p.strip() for p in parents.split(','))

    if language is None:
        language = 'und'
    lex = Lexicon(language, entries, metaphor, symbols, irregular,
                  {tag: frozenset(parents) for tag, parents in subtags.items()})
    logger.info("Loaded lexicon '%s': %d entries", language, len(lex))
    return lex


def load_lexicon_file(path: str) -> Lexicon:
    with open(path, encoding='utf-8') as handle:
        return load_lexicon(handle)


def dump_lexicon(lex: Lexicon) -> str:
    """Serialize back to the file format; load_lexicon(dump_lexicon(x)) reproduces x."""
    lines = [f'language: {lex.language}', '']
    for group in lex.entries.values():
        lines.extend(entry.to_line() for entry in group)
    if lex.symbols:
        lines += ['', '[symbols]'] + [f'{sym} = {surface}' for sym, surface in lex.symbols.items()]
    if lex.irregular:
        lines += ['', '[irregular]'] + [f'{stem} + {marker} = {fused}'
                                        for (stem, marker), fused in lex.irregular.items()]
    if lex.metaphor_map:
        lines += ['', '[metaphor]'] + [f'{src} -> {dst}' for src, dst in lex.metaphor_map.items()]
    if lex.subtags:
        lines += ['', '[subtags]'] + [f'{tag} < ' + ','.join(sorted(parents))
                                      for tag, parents in lex.subtags.items()]
    return '\n'.join(lines) + '\n'


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

def lookup(lex: Lexicon, surface: str) -> List[LexiconEntry]:
    """All entries for surface in file order; digit strings are implicit numerals."""
    found = lex.entries.get(surface)
    if found:
        return list(found)
    if surface.isdigit():
        return [LexiconEntry(surface, lex.language, (('NUM',),), arity=1, value=int(surface))]
    return []


def symbol_surface(lex: Lexicon, text: str) -> str:
    """Surface realizing a formula symbol: the [symbols] map, else the lowercased text."""
    return lex.symbols.get(text, text.lower())


def entries_for_symbol(lex: Lexicon, text: str) -> List[LexiconEntry]:
    return lookup(lex, symbol_surface(lex, text))


def is_marker(lex: Lexicon, text: str) -> bool:
    """True for symbols realized by a bound morpheme (`Y` -> `-s`)."""
    return symbol_surface(lex, text).startswith('-')


def marker_symbols(lex: Lexicon) -> List[str]:
    return [sym for sym, surface in lex.symbols.items() if surface.startswith('-')]


def fuse(lex: Lexicon, stem: str, marker: str) -> str:
    """Fused form of stem surface + marker symbol (`box` + `Y` -> `boxes`)."""
    irregular = lex.irregular.get((stem, marker))
    if irregular:
        return irregular
    return stem + symbol_surface(lex, marker).lstrip('-')


def analyze_fused(lex: Lexicon, surface: str) -> List[FusedForm]:
    """Stem + marker readings of a surface that has no entry of its own."""
    if lookup(lex, surface):
        return []
    found = [FusedForm(stem, marker) for (stem, marker), fused in lex.irregular.items() if fused == surface]
    for marker in marker_symbols(lex):
        suffix = symbol_surface(lex, marker).lstrip('-')
        if suffix and surface.endswith(suffix) and len(surface) > len(suffix):
            stem = surface[:-len(suffix)]
            reading = FusedForm(stem, marker)
            if lookup(lex, stem) and reading not in found:
                found.append(reading)
    return found


def arity_of(lex: Lexicon, text: str) -> Optional[int]:
    found = entries_for_symbol(lex, text)
    return found[0].arity if found else None


def tag_closure(lex: Lexicon, tags: FrozenSet[str]) -> FrozenSet[str]:
    """Tags plus every ancestor declared in [subtags]."""
    seen: Set[str] = set()
    todo = list(tags)
    while todo:
        tag = todo.pop()
        if tag not in seen:
            seen.add(tag)
            todo.extend(lex.subtags.get(tag, ()))
    return frozenset(seen)


def semantic_tags(lex: Lexicon, text: str) -> FrozenSet[str]:
    tags: Set[str] = set()
    for entry in entries_for_symbol(lex, text):
        tags |= entry.semantic_tags
    return frozenset(tags)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_lexicon(lex: Lexicon, rs=None) -> List[Dict[str, Any]]:
    """Report lexicon invariant violations as dict items.

    Subtyping between /-type alternatives and undeclared type names are
    only checked when a RuleSet is given.
    """
    from morphotype import type_system

    findings: List[Dict[str, Any]] = []
    for surface, group in lex.entries.items():
        arities = sorted({entry.arity for entry in group})
        if len(arities) > 1:
            findings.append({'kind': 'arity-conflict', 'surface': surface, 'arities': arities})
        for entry in group:
            if entry.language != lex.language:
                findings.append({'kind': 'language-mismatch', 'surface': surface, 'language': entry.language})
            if entry.is_flexeme and len(entry.types) + int(entry.open_tail) < 2:
                findings.append({'kind': 'flexeme-too-small', 'surface': surface, 'types': entry.type_text()})
            if rs is None:
                continue
            for name in sorted(entry.type_names | ({entry.marker} if entry.marker else set())):
                if not type_system.is_declared(name, rs):
                    findings.append({'kind': 'undeclared-type', 'surface': surface, 'type': name})
            if entry.is_flexeme:
                findings.extend(_flexeme_findings(entry, rs))

    for src, dst in lex.metaphor_map.items():
        for sym in (src, dst):
            if not entries_for_symbol(lex, sym):
                findings.append({'kind': 'dangling-metaphor', 'symbol': sym, 'rule': f'{src} -> {dst}'})
    for (stem, marker), fused in lex.irregular.items():
        if not lookup(lex, stem):
            findings.append({'kind': 'dangling-irregular', 'stem': stem, 'fused': fused})
        if not is_marker(lex, marker):
            findings.append({'kind': 'dangling-irregular', 'marker': marker, 'fused': fused})
    return findings


def _flexeme_findings(entry: LexiconEntry, rs) -> List[Dict[str, Any]]:
    from morphotype import type_system

    findings = []
    for i, left in enumerate(entry.types):
        for j, right in enumerate(entry.types):
            if i == j:
                continue
            for a in left:
                for b in right:
                    if type_system.is_declared(a, rs) and type_system.is_declared(b, rs) \
                            and type_system.subtype(a, b, rs):
                        findings.append({'kind': 'flexeme-subtyping', 'surface': entry.surface,
                                         'types': entry.type_text(), 'subtype': a, 'supertype': b})
    return findings

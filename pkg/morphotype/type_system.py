"""
Morphotype - Type System

Type patterns, rule sets and the chart-based well-typedness checker.

A rule file holds one rule per line:

    o(DET, DEM) : D                       membership (names become subtypes)
    [CAP] <ADL>(Y(R)) {CAP}* = RS         equation (a constituent pattern)

plus directives `!types`, `!chain` (the subsumption hierarchy) and
`!forbid L R` (constituent types that may not be juxtaposed in a weakly
well-typed construction). Pattern notation:

    A|B  alternative      [A]   optional        <A>   sequence (maybe empty)
    {A,B}* any mix        {A,B} alternative     A\\B   A except B
    S[\\X] S with gap     X/R/* /-type          .     any constituent
    *    any run          F(A)  application     o(A)  terms of type A
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, IO, Iterable, List, Optional, Sequence, Set, Tuple, Union

from pyparsing import (DelimitedList, Forward, Group, Literal, OneOrMore, Optional as Maybe,
                       ParseException, Regex, StringEnd, Suppress, ZeroOrMore)

from morphotype.formula_syntax import PatternSyntaxError, UnknownType, UnknownWord
from morphotype.lexicon import Lexicon, LexiconEntry, TypeAlternative, analyze_fused, entries_for_symbol, lookup

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Name:
    name: str
    index: Optional[str] = None  # tracking index as in C_a; ignored by matching


@dataclass(frozen=True)
class Alt:
    options: Tuple['Pattern', ...]


@dataclass(frozen=True)
class Opt:
    inner: 'Pattern'


@dataclass(frozen=True)
class Seq:
    inner: 'Pattern'


@dataclass(frozen=True)
class SetStar:
    items: Tuple['Pattern', ...]


@dataclass(frozen=True)
class Except:
    inner: 'Pattern'
    excluded: 'Pattern'
    optional: bool = False  # S[\Xh]: the gap may or may not be present

    def __post_init__(self):
        if self.inner == self.excluded:
            raise ValueError('a pattern cannot exclude itself')


@dataclass(frozen=True)
class Slash:
    alternatives: Tuple[TypeAlternative, ...]
    open_tail: bool = False

    def __post_init__(self):
        if len(self.alternatives) + int(self.open_tail) < 2:
            raise ValueError('a /-type needs two alternatives or an open tail')


@dataclass(frozen=True)
class AnyFormula:
    pass


@dataclass(frozen=True)
class AnyString:
    pass


@dataclass(frozen=True)
class Apply:
    head: 'Pattern'
    args: Tuple['Pattern', ...]


@dataclass(frozen=True)
class Terms:
    items: Tuple['Pattern', ...]


@dataclass(frozen=True)
class Concat:
    parts: Tuple['Pattern', ...]


Pattern = Union[Name, Alt, Opt, Seq, SetStar, Except, Slash, AnyFormula, AnyString, Apply, Terms, Concat]


@dataclass(frozen=True)
class _Suffix:
    kind: str
    pattern: Pattern


def _build_slash(tokens) -> Slash:
    alternatives = []
    open_tail = False
    for tok in tokens:
        if isinstance(tok, str):
            if tok == '*':
                open_tail = True
            else:
                alternatives.append((tok,))
        else:
            alternatives.append(tuple(tok))
    return Slash(tuple(alternatives), open_tail)


def _build_name(tokens) -> Name:
    text = tokens[0]
    if '_' in text:
        base, _, index = text.partition('_')
        return Name(base, index)
    return Name(text)


def _build_braces(tokens) -> Pattern:
    items = list(tokens)
    starred = bool(items) and isinstance(items[-1], str)
    if starred:
        items = items[:-1]
    if starred:
        return SetStar(tuple(items))
    return items[0] if len(items) == 1 else Alt(tuple(items))


def _build_apply(tokens) -> Pattern:
    node = tokens[0]
    for arglist in tokens[1:]:
        node = Apply(node, tuple(arglist))
    return node


def _build_except(tokens) -> Pattern:
    if len(tokens) == 1:
        return tokens[0]
    suffix = tokens[1]
    return Except(tokens[0], suffix.pattern, optional=suffix.kind == 'optional')


def _pattern_grammar():
    ident = r'[A-Za-z][A-Za-z0-9\-]*'
    expr = Forward()

    name = Regex(ident + r'(?:_[a-z][a-z0-9]*)?').set_parse_action(_build_name)
    choice = Group(Suppress('(') + DelimitedList(Regex(ident), delim='|') + Suppress(')'))
    slash = (Regex(ident) + OneOrMore(Suppress('/') + (Literal('*') | choice | Regex(ident)))
             ).set_parse_action(_build_slash)

    call_open = Literal('(').leave_whitespace().suppress()
    arglist = Group(call_open + DelimitedList(expr, delim=',') + Suppress(')'))

    terms = (Regex(r'o\(').suppress() + DelimitedList(expr, delim=',') + Suppress(')')
             ).set_parse_action(lambda t: Terms(tuple(t)))
    braces = (Suppress('{') + DelimitedList(expr, delim=',') + Suppress('}') + Maybe(Literal('*'))
              ).set_parse_action(_build_braces)
    seq = (Suppress('<') + expr + Suppress('>') + Maybe(Suppress('*'))).set_parse_action(lambda t: Seq(t[0]))
    opt = (Suppress('[') + expr + Suppress(']')).set_parse_action(lambda t: Opt(t[0]))
    group = Suppress('(') + expr + Suppress(')')
    dot = Literal('.').set_parse_action(lambda: AnyFormula())
    star = Literal('*').set_parse_action(lambda: AnyString())

    primary = terms | braces | seq | opt | group | dot | star | slash | name
    postfix = (primary + ZeroOrMore(arglist)).set_parse_action(_build_apply)

    gap = (Regex(r'\[\s*\\').suppress() + postfix + Suppress(']')
           ).set_parse_action(lambda t: _Suffix('optional', t[0]))
    minus = (Suppress('\\') + postfix).set_parse_action(lambda t: _Suffix('except', t[0]))
    excepted = (postfix + Maybe(gap | minus)).set_parse_action(_build_except)

    concat = OneOrMore(excepted).set_parse_action(lambda t: t[0] if len(t) == 1 else Concat(tuple(t)))
    alt = (concat + ZeroOrMore(Suppress('|') + concat)).set_parse_action(
        lambda t: t[0] if len(t) == 1 else Alt(tuple(t)))
    expr <<= alt
    return expr + StringEnd()


_GRAMMAR = _pattern_grammar()


def parse_type_pattern(text: str) -> Pattern:
    """Parse pattern notation into a Pattern; raise PatternSyntaxError with a position."""
    if not text.strip():
        raise PatternSyntaxError('empty pattern', 0)
    try:
        return _GRAMMAR.parse_string(text, parse_all=True)[0]
    except ParseException as exc:
        raise PatternSyntaxError(f'cannot parse pattern {text!r}: {exc.msg}', exc.loc)
    except ValueError as exc:
        raise PatternSyntaxError(str(exc), 0)


def format_pattern(p: Pattern, nested: bool = False) -> str:
    """Canonical printer; parse_type_pattern(format_pattern(p)) == p."""
    if isinstance(p, Name):
        return p.name + (f'_{p.index}' if p.index else '')
    if isinstance(p, Alt):
        text = '|'.join(format_pattern(o, nested=True) for o in p.options)
        return f'({text})' if nested else text
    if isinstance(p, Opt):
        return '[' + format_pattern(p.inner) + ']'
    if isinstance(p, Seq):
        return '<' + format_pattern(p.inner) + '>'
    if isinstance(p, SetStar):
        return '{' + ', '.join(format_pattern(i) for i in p.items) + '}*'
    if isinstance(p, Except):
        if isinstance(p.excluded, Alt):
            right = '{' + ', '.join(format_pattern(o) for o in p.excluded.options) + '}'
        else:
            right = format_pattern(p.excluded, nested=True)
        left = format_pattern(p.inner, nested=True)
        return f'{left}[\\{right}]' if p.optional else f'{left}\\{right}'
    if isinstance(p, Slash):
        parts = [alt[0] if len(alt) == 1 else '(' + '|'.join(alt) + ')' for alt in p.alternatives]
        return '/'.join(parts + (['*'] if p.open_tail else []))
    if isinstance(p, AnyFormula):
        return '.'
    if isinstance(p, AnyString):
        return '*'
    if isinstance(p, Apply):
        head = format_pattern(p.head, nested=True)
        if isinstance(p.head, Except):
            head = f'({head})'
        return head + '(' + ', '.join(format_pattern(a) for a in p.args) + ')'
    if isinstance(p, Terms):
        return 'o(' + ', '.join(format_pattern(i) for i in p.items) + ')'
    text = ' '.join(format_pattern(part, nested=True) for part in p.parts)
    return f'({text})' if nested else text


def pattern_names(p: Pattern) -> Set[str]:
    """Every type name mentioned anywhere in p."""
    if isinstance(p, Name):
        return {p.name}
    if isinstance(p, Slash):
        return {name for alt in p.alternatives for name in alt}
    if isinstance(p, (AnyFormula, AnyString)):
        return set()
    out: Set[str] = set()
    for child in _children(p):
        out |= pattern_names(child)
    return out


def _children(p: Pattern) -> Tuple[Pattern, ...]:
    if isinstance(p, Alt):
        return p.options
    if isinstance(p, (Opt, Seq)):
        return (p.inner,)
    if isinstance(p, (SetStar, Terms)):
        return p.items
    if isinstance(p, Except):
        return (p.inner, p.excluded)
    if isinstance(p, Apply):
        return (p.head,) + p.args
    if isinstance(p, Concat):
        return p.parts
    return ()


def contains_pattern(outer: Pattern, inner: Pattern) -> bool:
    return outer == inner or any(contains_pattern(child, inner) for child in _children(outer))


# ---------------------------------------------------------------------------
# Rule sets
# ---------------------------------------------------------------------------

MARKS = ('universal', 'possibly-universal', 'incomplete')


@dataclass(frozen=True)
class Rule:
    pattern: Pattern
    result: str
    kind: str  # 'membership' (:) or 'equation' (=)
    marks: FrozenSet[str] = frozenset()
    line_no: int = 0

    def to_line(self) -> str:
        sep = ':' if self.kind == 'membership' else '='
        marks = ''.join(f' @{m}' for m in MARKS if m in self.marks)
        return f'{format_pattern(self.pattern)} {sep} {self.result}{marks}'


@dataclass(frozen=True, eq=False)
class RuleSet:
    declared: Tuple[str, ...]
    rules: Tuple[Rule, ...]
    chain: Tuple[Pattern, ...] = ()
    forbidden: Tuple[Tuple[Pattern, Pattern], ...] = ()
    edges: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    supertypes: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    chart_rules: Tuple[Tuple[Pattern, str], ...] = ()


def _subtype_edges(rules: Sequence[Rule]) -> Dict[str, Set[str]]:
    edges: Dict[str, Set[str]] = {}
    for rule in rules:
        if rule.kind != 'membership':
            continue
        items = rule.pattern.items if isinstance(rule.pattern, Terms) else (rule.pattern,)
        for item in items:
            if isinstance(item, Name):
                edges.setdefault(item.name, set()).add(rule.result)
    return edges


def _closure(declared: Iterable[str], edges: Dict[str, Set[str]]) -> Dict[str, FrozenSet[str]]:
    closure = {}
    for name in set(declared) | set(edges):
        seen = {name}
        todo = deque([name])
        while todo:
            for parent in edges.get(todo.popleft(), ()):
                if parent not in seen:
                    seen.add(parent)
                    todo.append(parent)
        closure[name] = frozenset(seen)
    return closure


def build_rule_set(declared: Sequence[str], rules: Sequence[Rule], chain: Sequence[Pattern] = (),
                   forbidden: Sequence[Tuple[Pattern, Pattern]] = ()) -> RuleSet:
    edges = _subtype_edges(rules)
    chart_rules: List[Tuple[Pattern, str]] = []
    for rule in rules:
        if rule.kind == 'equation':
            chart_rules.append((rule.pattern, rule.result))
            continue
        items = rule.pattern.items if isinstance(rule.pattern, Terms) else (rule.pattern,)
        # /-types in o(...) name flexeme words, which already carry their alternatives
        complex_items = tuple(item for item in items if not isinstance(item, (Name, Slash)))
        if complex_items:
            pattern = complex_items[0] if len(complex_items) == 1 else Terms(complex_items)
            chart_rules.append((pattern, rule.result))
    return RuleSet(tuple(declared), tuple(rules), tuple(chain), tuple(forbidden),
                   {k: frozenset(v) for k, v in edges.items()}, _closure(declared, edges), tuple(chart_rules))


def _split_rule(line: str) -> Tuple[str, str, str]:
    depth = 0
    for i, ch in enumerate(line):
        if ch in '([{<':
            depth += 1
        elif ch in ')]}>':
            depth -= 1
        elif ch in ':=' and depth == 0:
            return line[:i].strip(), ch, line[i + 1:].strip()
    return line, '', ''


def load_rules(source: Union[str, bytes, IO]) -> RuleSet:
    """Load a rule file from text, bytes or an open file."""
    if hasattr(source, 'read'):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode('utf-8')

    declared: List[str] = []
    rules: List[Rule] = []
    chain: List[Pattern] = []
    forbidden: List[Tuple[Pattern, Pattern]] = []

    for line_no, raw in enumerate(source.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith('!types'):
                declared.extend(line.split()[1:])
            elif line.startswith('!chain'):
                chain = [parse_type_pattern(level) for level in line[len('!chain'):].split('<=')]
            elif line.startswith('!forbid'):
                parts = line.split()[1:]
                if len(parts) != 2:
                    raise PatternSyntaxError('!forbid takes a left and a right pattern', 0)
                forbidden.append((parse_type_pattern(parts[0]), parse_type_pattern(parts[1])))
            else:
                pattern_text, sep, rest = _split_rule(line)
                if not sep or not rest:
                    raise PatternSyntaxError("expected 'PATTERN : TYPE' or 'PATTERN = TYPE'", len(line))
                result, *marks = rest.split()
                unknown = [m for m in marks if not m.startswith('@') or m[1:] not in MARKS]
                if unknown:
                    raise PatternSyntaxError(f'unknown annotation {unknown[0]!r}', line.index(unknown[0]))
                rules.append(Rule(parse_type_pattern(pattern_text), result,
                                  'membership' if sep == ':' else 'equation',
                                  frozenset(m[1:] for m in marks), line_no))
        except PatternSyntaxError as exc:
            raise PatternSyntaxError(f'line {line_no}: {exc.message}', exc.position)

    rs = build_rule_set(declared, rules, chain, forbidden)
    logger.info('Loaded %d rules over %d types', len(rs.rules), len(set(rs.declared)))
    return rs


def load_rules_file(path: str) -> RuleSet:
    with open(path, encoding='utf-8') as handle:
        return load_rules(handle)


def is_declared(name: str, rs: RuleSet) -> bool:
    return name in rs.declared


def _require(name: str, rs: RuleSet) -> None:
    if name not in rs.declared:
        raise UnknownType(name)


def subtype(a: str, b: str, rs: RuleSet) -> bool:
    """a <: b in the reflexive-transitive closure of membership edges."""
    _require(a, rs)
    _require(b, rs)
    return b in rs.supertypes.get(a, frozenset({a}))


def close_types(types: Iterable[str], rs: RuleSet) -> FrozenSet[str]:
    out: Set[str] = set()
    for t in types:
        out |= rs.supertypes.get(t, frozenset({t}))
    return frozenset(out)


def _level_names(p: Pattern) -> Set[str]:
    if isinstance(p, Name):
        return {p.name}
    if isinstance(p, Alt) and all(isinstance(o, Name) for o in p.options):
        return {o.name for o in p.options}
    return set()


def chain_levels(rs: RuleSet) -> Dict[str, int]:
    """Level of every name on the subsumption chain.

    A name written at several levels (XC, first as a lower-order clause
    inside XP|XC) takes its highest one; the lower occurrence is covered
    by membership (XC <: Xh).
    """
    levels: Dict[str, int] = {}
    for i, level in enumerate(rs.chain):
        for name in _level_names(level):
            levels[name] = i
    return levels


def subsumes(a: str, b: str, rs: RuleSet) -> bool:
    """b ⊑ a: b sits at a lower level of the subsumption chain than a, or b <: a off the chain."""
    _require(a, rs)
    _require(b, rs)
    if a == b:
        return True
    levels = chain_levels(rs)
    if a in levels and b in levels:
        return levels[b] < levels[a]
    return subtype(b, a, rs)


def minimal_types(types: Iterable[str], rs: RuleSet) -> List[str]:
    """The types not implied by another, more specific one in the set."""
    types = set(types)
    return sorted(t for t in types
                  if not any(s != t and t in rs.supertypes.get(s, ()) for s in types))


# ---------------------------------------------------------------------------
# Rule audit
# ---------------------------------------------------------------------------

def _builds_on(result_names: Set[str], target: Set[str], rs: RuleSet) -> bool:
    """True if some rule producing a result name mentions a target name, transitively."""
    seen: Set[str] = set()
    todo = deque(result_names)
    while todo:
        name = todo.popleft()
        if name in seen:
            continue
        seen.add(name)
        if any(name in rs.supertypes.get(n, ()) for n in target):
            return True
        for rule in rs.rules:
            if rule.result != name:
                continue
            mentioned = pattern_names(rule.pattern)
            if mentioned & target:
                return True
            todo.extend(mentioned - seen)
    return False


def audit_rules(rs: RuleSet) -> List[Dict[str, Any]]:
    """Report undeclared or duplicated names, typing reflexivity, subtype cycles and chain breaks."""
    findings: List[Dict[str, Any]] = []
    seen: Set[str] = set()
    for name in rs.declared:
        if name in seen:
            findings.append({'kind': 'duplicate-type', 'type': name})
        seen.add(name)

    mentioned: Set[str] = set()
    for rule in rs.rules:
        mentioned |= pattern_names(rule.pattern) | {rule.result}
        if rule.kind == 'membership':
            items = rule.pattern.items if isinstance(rule.pattern, Terms) else (rule.pattern,)
            if any(isinstance(i, Name) and i.name == rule.result for i in items):
                findings.append({'kind': 'reflexive-typing', 'rule': rule.to_line(), 'line': rule.line_no})
    for level in rs.chain:
        mentioned |= pattern_names(level)
    for left, right in rs.forbidden:
        mentioned |= pattern_names(left) | pattern_names(right)
    for name in sorted(mentioned - seen):
        findings.append({'kind': 'undeclared-type', 'type': name})

    for name in sorted(seen):
        for parent in rs.supertypes.get(name, ()):
            if parent != name and name in rs.supertypes.get(parent, ()) and name < parent:
                findings.append({'kind': 'subtype-cycle', 'types': [name, parent]})

    for lower, upper in zip(rs.chain, rs.chain[1:]):
        if contains_pattern(upper, lower):
            continue
        if not _builds_on(pattern_names(upper), pattern_names(lower), rs):
            findings.append({'kind': 'chain-break', 'lower': format_pattern(lower),
                             'upper': format_pattern(upper)})
    return findings


def rule_table(rs: RuleSet) -> List[Dict[str, Any]]:
    rows = []
    for rule in rs.rules:
        rows.append({'line': rule.line_no, 'rule': rule.to_line().split(' @')[0], 'kind': rule.kind,
                     'result': rule.result,
                     'universality': next((m for m in ('universal', 'possibly-universal') if m in rule.marks), ''),
                     'incomplete': 'incomplete' in rule.marks})
    return rows


# ---------------------------------------------------------------------------
# Chart
# ---------------------------------------------------------------------------

Pins = Dict[int, TypeAlternative]


def _slash_accepts(p: Slash, types: FrozenSet[str]) -> bool:
    # an alternative (Q|D) is one of Q or D; the open tail matches nothing by itself
    return any(name in types for alt in p.alternatives for name in alt)


def accepts(p: Pattern, types: FrozenSet[str]) -> bool:
    """Does p accept one constituent carrying these (closed) types?"""
    if isinstance(p, Name):
        return p.name in types
    if isinstance(p, Slash):
        return _slash_accepts(p, types)
    if isinstance(p, (AnyFormula, AnyString)):
        return bool(types)
    if isinstance(p, Alt):
        return any(accepts(o, types) for o in p.options)
    if isinstance(p, (Terms, SetStar)):
        return any(accepts(i, types) for i in p.items)
    if isinstance(p, (Opt, Seq)):
        return accepts(p.inner, types)
    if isinstance(p, Except):
        return accepts(p.inner, types) and (p.optional or not accepts(p.excluded, types))
    if isinstance(p, Concat):
        return len(p.parts) == 1 and accepts(p.parts[0], types)
    if isinstance(p, Apply) and len(p.args) == 1 and isinstance(p.head, (Opt, Seq)):
        # [Y](X): the marker may be absent
        return accepts(p.args[0], types)
    return False


class Chart:
    """Typed spans over a word sequence.

    `spans[i][j]` holds the upward closed types of words[i:j]; `fused[i]`
    holds (marker types, stem types) readings of one marked word such as
    `boxes` or `is`.
    """

    def __init__(self, words: Sequence[str], rs: RuleSet):
        self.words = list(words)
        self.n = len(self.words)
        self.rs = rs
        self.spans: Dict[int, Dict[int, Set[str]]] = {i: {} for i in range(self.n + 1)}
        self.fused: Dict[int, List[Tuple[FrozenSet[str], FrozenSet[str]]]] = {}
        self._memo: Dict[Tuple[Any, int], FrozenSet[int]] = {}

    def add(self, i: int, j: int, types: Iterable[str]) -> bool:
        current = self.spans[i].setdefault(j, set())
        new = close_types(types, self.rs) - current
        current |= new
        return bool(new)

    def add_fused(self, i: int, marker_types: Iterable[str], stem_types: Iterable[str]) -> None:
        self.fused.setdefault(i, []).append((close_types(marker_types, self.rs), close_types(stem_types, self.rs)))

    def types(self, i: int, j: int) -> FrozenSet[str]:
        return frozenset(self.spans.get(i, {}).get(j, ()))

    def ends(self, p: Pattern, i: int) -> FrozenSet[int]:
        key = (p, i)
        found = self._memo.get(key)
        if found is None:
            found = frozenset(self._ends(p, i))
            self._memo[key] = found
        return found

    def _ends(self, p: Pattern, i: int) -> Set[int]:
        if isinstance(p, Name):
            return {j for j, types in self.spans[i].items() if p.name in types}
        if isinstance(p, Slash):
            return {j for j, types in self.spans[i].items() if _slash_accepts(p, frozenset(types))}
        if isinstance(p, AnyFormula):
            return {j for j, types in self.spans[i].items() if types}
        if isinstance(p, AnyString):
            return set(range(i, self.n + 1))
        if isinstance(p, (Alt, Terms)):
            out: Set[int] = set()
            for item in (p.options if isinstance(p, Alt) else p.items):
                out |= self.ends(item, i)
            return out
        if isinstance(p, Opt):
            return {i} | self.ends(p.inner, i)
        if isinstance(p, Seq):
            return self._star((p.inner,), i)
        if isinstance(p, SetStar):
            return self._star(p.items, i)
        if isinstance(p, Except):
            if p.optional:
                return set(self.ends(p.inner, i))
            return set(self.ends(p.inner, i) - self.ends(p.excluded, i))
        if isinstance(p, Concat):
            return self._concat(p.parts, i)
        if isinstance(p, Apply):
            out = set()
            if len(p.args) == 1:
                for marker_types, stem_types in self.fused.get(i, ()):
                    if accepts(p.head, marker_types) and accepts(p.args[0], stem_types):
                        out.add(i + 1)
            out |= self._concat((p.head,) + p.args, i)
            if len(p.args) == 2:
                # binary connectives are written infix
                out |= self._concat((p.args[0], p.head, p.args[1]), i)
            return out
        raise TypeError(f'not a pattern: {p!r}')

    def _concat(self, parts: Sequence[Pattern], i: int) -> Set[int]:
        positions = {i}
        for part in parts:
            nxt: Set[int] = set()
            for k in positions:
                nxt |= self.ends(part, k)
            positions = nxt
            if not positions:
                break
        return positions

    def _star(self, items: Sequence[Pattern], i: int) -> Set[int]:
        reached = {i}
        todo = deque([i])
        while todo:
            k = todo.popleft()
            for item in items:
                for j in self.ends(item, k):
                    if j > k and j not in reached:
                        reached.add(j)
                        todo.append(j)
        return reached

    def bindings(self, p: Pattern, i: int, j: int) -> Optional[List[Tuple[int, str]]]:
        """One way p covers words[i:j], as (position, type) pairs; None if it does not."""
        if j not in self.ends(p, i):
            return None
        if isinstance(p, Name):
            return [(k, p.name) for k in range(i, j)]
        if isinstance(p, Slash):
            types = self.types(i, j)
            name = next(name for alt in p.alternatives for name in alt if name in types)
            return [(k, name) for k in range(i, j)]
        if isinstance(p, (AnyFormula, AnyString)):
            return [(k, '*') for k in range(i, j)]
        if isinstance(p, (Alt, Terms)):
            for item in (p.options if isinstance(p, Alt) else p.items):
                found = self.bindings(item, i, j)
                if found is not None:
                    return found
            return None
        if isinstance(p, Opt):
            return [] if i == j else self.bindings(p.inner, i, j)
        if isinstance(p, Seq):
            return self._star_bindings((p.inner,), i, j)
        if isinstance(p, SetStar):
            return self._star_bindings(p.items, i, j)
        if isinstance(p, Except):
            return self.bindings(p.inner, i, j)
        if isinstance(p, Concat):
            return self._concat_bindings(p.parts, i, j)
        if isinstance(p, Apply):
            if len(p.args) == 1 and j == i + 1:
                for marker_types, stem_types in self.fused.get(i, ()):
                    if accepts(p.head, marker_types) and accepts(p.args[0], stem_types):
                        return [(i, format_pattern(p))]
            found = self._concat_bindings((p.head,) + p.args, i, j)
            if found is None and len(p.args) == 2:
                found = self._concat_bindings((p.args[0], p.head, p.args[1]), i, j)
            return found
        raise TypeError(f'not a pattern: {p!r}')

    def _concat_bindings(self, parts: Sequence[Pattern], i: int, j: int) -> Optional[List[Tuple[int, str]]]:
        if not parts:
            return [] if i == j else None
        for k in sorted(self.ends(parts[0], i)):
            if k > j:
                continue
            rest = self._concat_bindings(parts[1:], k, j)
            if rest is not None:
                first = self.bindings(parts[0], i, k)
                if first is not None:
                    return first + rest
        return None

    def _star_bindings(self, items: Sequence[Pattern], i: int, j: int) -> Optional[List[Tuple[int, str]]]:
        if i == j:
            return []
        for item in items:
            for k in sorted(self.ends(item, i)):
                if not i < k <= j:
                    continue
                rest = self._star_bindings(items, k, j)
                if rest is not None:
                    first = self.bindings(item, i, k)
                    if first is not None:
                        return first + rest
        return None

    def saturate(self) -> None:
        """Apply the chart rules until no span gains a type."""
        rounds = 0
        changed = True
        while changed:
            changed = False
            rounds += 1
            self._memo.clear()
            for pattern, result in self.rs.chart_rules:
                for i in range(self.n):
                    for j in self.ends(pattern, i):
                        if j > i and self.add(i, j, (result,)):
                            changed = True
        self._memo.clear()
        logger.debug('chart over %r saturated after %d rounds', self.words, rounds)


def _entry_types(entry: LexiconEntry, pin: Optional[TypeAlternative]) -> FrozenSet[str]:
    """Types a word gets; a pin narrows a /-type to (part of) one alternative."""
    if entry.is_flexeme and pin is not None and any(set(pin) <= set(alt) for alt in entry.types):
        return frozenset(pin)
    return entry.type_names


def _add_fused_readings(chart: Chart, i: int, lex: Lexicon, pin: Optional[TypeAlternative]) -> bool:
    found = False
    for form in analyze_fused(lex, chart.words[i]):
        stems = lookup(lex, form.stem)
        markers = entries_for_symbol(lex, form.marker)
        if not stems or not markers:
            continue
        stem_types: Set[str] = set()
        for entry in stems:
            stem_types |= _entry_types(entry, pin)
        marker_types = {name for entry in markers for name in entry.type_names}
        chart.add(i, i + 1, stem_types)
        chart.add_fused(i, marker_types, stem_types)
        found = True
    return found


def build_chart(words: Sequence[str], lex: Lexicon, rs: RuleSet, pins: Optional[Pins] = None) -> Chart:
    """Seed a chart from the lexicon (multiword surfaces and fused forms included) and saturate it."""
    pins = pins or {}
    chart = Chart(words, rs)
    covered = [False] * chart.n
    width = lex.max_words
    for i in range(chart.n):
        for k in range(1, min(width, chart.n - i) + 1):
            for entry in lookup(lex, ' '.join(chart.words[i:i + k])):
                types = _entry_types(entry, pins.get(i) if k == 1 else None)
                chart.add(i, i + k, types)
                if entry.marker:
                    chart.add_fused(i, (entry.marker,), types)
                covered[i:i + k] = [True] * k
        if not covered[i] and _add_fused_readings(chart, i, lex, pins.get(i)):
            covered[i] = True
    for i, ok in enumerate(covered):
        if not ok:
            raise UnknownWord(chart.words[i])
    chart.saturate()
    return chart


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    well_typed: bool
    wf_types: FrozenSet[str] = frozenset()
    reason: str = ''
    position: Optional[int] = None
    primary: Tuple[str, ...] = ()

    @property
    def wf(self) -> bool:
        return bool(self.wf_types)

    def label(self) -> str:
        if self.wf:
            return 'wf:' + '|'.join(self.primary)
        return 'welltyped' if self.well_typed else 'ill'


def forbidden_pair(left: FrozenSet[str], right: FrozenSet[str], rs: RuleSet) -> Optional[Tuple[Pattern, Pattern]]:
    for pair in rs.forbidden:
        if accepts(pair[0], left) and accepts(pair[1], right):
            return pair
    return None


def verdict_from_chart(chart: Chart) -> Verdict:
    rs, n, words = chart.rs, chart.n, chart.words
    full = chart.types(0, n)
    if full:
        return Verdict(True, full, primary=tuple(minimal_types(full, rs)))

    # weak well-typedness: a partition into constituents with no forbidden juxtaposition
    reach: Dict[int, Set[FrozenSet[str]]] = {0: {frozenset()}}
    blocked: Dict[int, Tuple[Pattern, Pattern]] = {}
    for p in range(n):
        for last in reach.get(p, ()):
            for j, types in chart.spans[p].items():
                if not types:
                    continue
                pair = forbidden_pair(last, frozenset(types), rs) if last else None
                if pair:
                    blocked.setdefault(p, pair)
                    continue
                reach.setdefault(j, set()).add(frozenset(types))
    if reach.get(n):
        return Verdict(True, reason='well-typed construction, not a single constituent')

    position = max(p for p, lasts in reach.items() if lasts)
    if position in blocked:
        left, right = blocked[position]
        reason = f"'{words[position]}' cannot follow here ({format_pattern(left)} before {format_pattern(right)})"
    else:
        reason = f"no constituent starting at '{words[position]}'"
    return Verdict(False, reason=reason, position=position)


def check_well_typed(words: Sequence[str], lex: Lexicon, rs: RuleSet, pins: Optional[Pins] = None) -> Verdict:
    """wf:T when one constituent of type T spans all words, welltyped when a
    partition into constituents exists, ill otherwise (with the first word
    that cannot be reached)."""
    words = list(words)
    if not words:
        return Verdict(False, reason='empty expression', position=0)
    verdict = verdict_from_chart(build_chart(words, lex, rs, pins))
    logger.debug('%s -> %s', ' '.join(words), verdict.label())
    return verdict


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    end: int
    furthest: int
    bindings: Tuple[Tuple[str, str], ...] = ()

    @property
    def span(self) -> Tuple[int, int]:
        return (0, self.end)


def match_pattern(constituents: Sequence[Tuple[str, Iterable[str]]], p: Pattern, rs: RuleSet,
                  lex: Optional[Lexicon] = None) -> MatchResult:
    """Match p against constituents carrying candidate types; success iff p consumes them all.

    On success, bindings pair every constituent with the type it was matched as.
    """
    chart = Chart([expression for expression, _ in constituents], rs)
    for i, (expression, types) in enumerate(constituents):
        chart.add(i, i + 1, types)
        if lex is not None:
            _add_fused_readings(chart, i, lex, None)
    ends = chart.ends(p, 0)
    furthest = max(ends, default=0)
    if chart.n in ends:
        path = chart.bindings(p, 0, chart.n) or []
        bound = tuple((chart.words[k], name) for k, name in path)
        return MatchResult(True, chart.n, chart.n, bound)
    return MatchResult(False, furthest, furthest)


# ---------------------------------------------------------------------------
# /-types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlexemeResolution:
    surface: str
    chosen: Optional[TypeAlternative]
    survivors: Tuple[TypeAlternative, ...]
    reason: str = ''

    @property
    def resolved(self) -> bool:
        return self.chosen is not None


def alternative_fits(alt: TypeAlternative, required: str, words: Sequence[str], position: int,
                     lex: Lexicon, rs: RuleSet) -> bool:
    """Are words wf as `required` with the word at position read as one of alt's types?"""
    return any(required in check_well_typed(words, lex, rs, pins={position: (name,)}).wf_types
               for name in alt)


def resolve_flexeme(entry: LexiconEntry, required: str, words: Sequence[str], position: int,
                    lex: Lexicon, rs: RuleSet) -> FlexemeResolution:
    """Pick the one alternative of entry under which words are wf as `required`.

    Zero or several surviving alternatives is a failed resolution, never a guess.
    """
    _require(required, rs)
    if not entry.is_flexeme:
        return FlexemeResolution(entry.surface, None, (), 'not a /-type')
    survivors = tuple(alt for alt in entry.types if alternative_fits(alt, required, words, position, lex, rs))
    if len(survivors) == 1:
        return FlexemeResolution(entry.surface, survivors[0], survivors)
    if not survivors:
        return FlexemeResolution(entry.surface, None, survivors, f'no reading of {entry.surface!r} gives {required}')
    readings = ', '.join('|'.join(alt) for alt in survivors)
    return FlexemeResolution(entry.surface, None, survivors, f'ambiguous between {readings}')

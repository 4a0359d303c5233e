"""
Morphotype - Derivation

Valuation order, stage-by-stage derivation of expressions from formulas,
stage verdicts, scoring and adjudication between competing formulas.

Valuation runs inside out and right to left: every argument is derived
before the relation consuming it, and each stage adds one relation with
its folded co-arguments to what was derived before. A formula is a
candidate logical form only when every stage it derives is well-typed;
among candidates, more inhabited stages is better.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from joblib import Parallel, delayed

from morphotype.formula_syntax import (Application, ArityMismatch, Atom, EmptyCandidateList, Formula,
                                       FormulaSyntaxError, MorphotypeError, UnknownWord, atoms,
                                       complex_subformulas, parse_formula, subformulas)
from morphotype.lexicon import Lexicon, entries_for_symbol, fuse, is_marker, symbol_surface
from morphotype.type_system import RuleSet, Verdict, check_well_typed, close_types

logger = logging.getLogger(__name__)

VERBAL_TYPES = frozenset({'V', 'COP', 'AUX', 'IR', 'R'})

COMPLETE = 'complete'
DISQUALIFIED_SYNTAX = 'disqualified-syntax'
DISQUALIFIED_STAGE = 'disqualified-stage'
REJECTED = 'rejected'

GROUPED_IN_CHAIN = 'bracketed argument inside an unbracketed application chain'

Segments = List[List[str]]


# ---------------------------------------------------------------------------
# Reading: application chains are valued inside out
# ---------------------------------------------------------------------------

def is_chain(f: Formula) -> bool:
    """A(x1)(x2)...: an application whose head is an unbracketed application or a bracketed chain."""
    return (isinstance(f, Application) and isinstance(f.head, Application)
            and (not f.head.grouped or is_chain(f.head)))


def _read(f: Formula, tops: Dict[int, Application]) -> Formula:
    """Rebuild f with every chain A(x1)(x2)...(xn) read as A(x1(x2(...(xn)))).

    Atoms are shared with f, so atom identity carries over. tops maps each
    unwound chain node of f to the top node of its reading.
    """
    if isinstance(f, Atom):
        return f
    if not is_chain(f):
        return Application(_read(f.head, tops), tuple(_read(arg, tops) for arg in f.args), f.span, f.grouped)

    unwound, arglists = [], []
    g = f
    while isinstance(g, Application) and (g is f or len(g.args) == 1) and (is_chain(g) or not g.grouped):
        unwound.append(g)
        arglists.append(g.args)
        g = g.head
    arglists.reverse()

    inner = tuple(_read(arg, tops) for arg in arglists[-1])
    for args in reversed(arglists[:-1]):
        inner = (Application(_read(args[0], tops), inner),)
    top = Application(_read(g, tops), inner, f.span, f.grouped)
    for node in unwound:
        tops[id(node)] = top
    return top


def reading(f: Formula) -> Formula:
    return _read(f, {})


def _is_flat(f: Formula) -> bool:
    return (isinstance(f, Application) and not f.grouped and isinstance(f.head, Atom)
            and all(isinstance(arg, Atom) for arg in f.args))


def argument_order(args: Sequence[Formula]) -> List[Formula]:
    """Right to left; atoms yield to complex arguments once any of those is deep or bracketed."""
    order = list(reversed(args))
    if any(isinstance(arg, Application) and not _is_flat(arg) for arg in order):
        order = ([arg for arg in order if isinstance(arg, Application)]
                 + [arg for arg in order if isinstance(arg, Atom)])
    return order


def valuation_order(f: Formula) -> List[Formula]:
    """Nodes of f, each argument before the application consuming it.

    Siblings go right to left (subject, object, indirect object for a
    verb written V(io, o, s)); a complex head follows the arguments it is
    applied to. Atomic heads are valued with their application.
    """
    out: List[Formula] = []

    def visit(g: Formula) -> None:
        if isinstance(g, Application):
            for arg in argument_order(g.args):
                visit(arg)
            if isinstance(g.head, Application):
                visit(g.head)
        out.append(g)

    visit(f)
    return out


def lexical_head(f: Formula, lex: Lexicon) -> Atom:
    while isinstance(f, Application):
        if isinstance(f.head, Atom) and len(f.args) == 1 and is_marker(lex, f.head.symbol.text):
            f = f.args[0]
        else:
            f = f.head
    return f


# ---------------------------------------------------------------------------
# Linearization
# ---------------------------------------------------------------------------

def _attach(head: Segments, arg: Segments, place: str) -> Segments:
    words = [word for segment in head for word in segment]
    if not words:
        return arg
    if not arg:
        return [words]
    if place == 'after':
        return arg[:-1] + [arg[-1] + words]
    if place == 'infix':
        return arg[:1] + [words] + arg[1:]
    return [words + arg[0]] + arg[1:]


def _concat(parts: Sequence[Segments]) -> Segments:
    return [segment for part in parts for segment in part]


class _Realizer:
    """Linearizes one formula reading, restricted to the atoms introduced so far.

    Markers fuse with their site: the first verbal atom of their argument,
    else the argument's lexical head. Relations with a marker or a verbal
    head go subject first; other heads attach by their entry's place.
    """

    def __init__(self, lex: Lexicon, rs: RuleSet, introduced: Optional[FrozenSet[int]] = None):
        self.lex = lex
        self.rs = rs
        self.introduced = introduced
        self.fusions: Dict[int, List[str]] = {}
        self._type_cache: Dict[str, FrozenSet[str]] = {}

    def realize(self, f: Formula) -> Segments:
        self.fusions = {}
        for g in complex_subformulas(f):
            if self._is_marker_app(g) and self._has(g.head):
                site = self._site(g.args[0])
                self.fusions.setdefault(id(site), []).append(g.head.symbol.text)
        return self._segments(f)

    def _has(self, a: Atom) -> bool:
        return self.introduced is None or id(a) in self.introduced

    def _types(self, a: Atom) -> FrozenSet[str]:
        text = a.symbol.text
        if text not in self._type_cache:
            names: Set[str] = set()
            for entry in entries_for_symbol(self.lex, text):
                names |= entry.type_names
            self._type_cache[text] = frozenset(names)
        return self._type_cache[text]

    def _place(self, a: Atom) -> str:
        found = entries_for_symbol(self.lex, a.symbol.text)
        return found[0].place if found else 'before'

    def _is_marker_app(self, g: Formula) -> bool:
        return (isinstance(g, Application) and isinstance(g.head, Atom) and len(g.args) == 1
                and is_marker(self.lex, g.head.symbol.text))

    def _site(self, arg: Formula) -> Atom:
        for a in atoms(arg):
            if self._types(a) & VERBAL_TYPES and not is_marker(self.lex, a.symbol.text):
                return a
        return lexical_head(arg, self.lex)

    def _is_verbal(self, f: Application) -> bool:
        for g in subformulas(f.head):
            if self._is_marker_app(g) and 'Y' in close_types(self._types(g.head), self.rs):
                return True
        return bool(self._types(lexical_head(f, self.lex)) & VERBAL_TYPES)

    def _words(self, a: Atom) -> List[str]:
        if not self._has(a) or is_marker(self.lex, a.symbol.text):
            return []
        surface = symbol_surface(self.lex, a.symbol.text)
        for marker in self.fusions.get(id(a), ()):
            surface = fuse(self.lex, surface, marker)
        return surface.split()

    def _segments(self, f: Formula, embedded: bool = False) -> Segments:
        """embedded: f fills a non-subject slot of a verbal relation."""
        if isinstance(f, Atom):
            words = self._words(f)
            return [words] if words else []
        head, args = f.head, f.args
        if self._is_marker_app(f):
            return self._segments(args[0], embedded)
        # (F(G))(x) with a quantifier F: F goes before the whole G(x)
        if (len(args) == 1 and isinstance(head, Application) and len(head.args) == 1
                and isinstance(head.head, Atom) and 'Q' in self._types(head.head)):
            lifted = self._segments(Application(head.args[0], args))
            return _attach(self._segments(head.head), lifted, 'before')

        verbal = self._is_verbal(f)
        head_segments = self._segments(head)
        if verbal and len(args) > 1:
            arg_segments = [self._segments(arg, embedded=k < len(args) - 1) for k, arg in enumerate(args)]
        else:
            arg_segments = [self._segments(arg) for arg in args]
        place = self._place(lexical_head(f, self.lex))
        if verbal:
            if len(args) > 1:
                if embedded:
                    # a clause in object position keeps its subject after the objects
                    return _concat([head_segments] + arg_segments)
                if place == 'after':
                    return _concat(arg_segments[::-1] + [head_segments])
                return _concat([arg_segments[-1], head_segments] + arg_segments[-2::-1])
            if 'A' in self._types(lexical_head(args[0], self.lex)):
                return _concat([head_segments, arg_segments[0]])
            return _concat([arg_segments[0], head_segments])
        if len(args) == 1:
            return _attach(head_segments, arg_segments[0], place)
        return _concat([arg_segments[0], head_segments] + arg_segments[1:])


def realize(f: Formula, lex: Lexicon, rs: RuleSet) -> List[str]:
    """The expression a whole formula derives, as a word list."""
    return [word for segment in _Realizer(lex, rs).realize(reading(f)) for word in segment]


def abbreviate(words: Sequence[str]) -> str:
    """First letter of each word; numerals stay whole."""
    return ''.join(word if word.isdigit() else word[0] for word in words if word)


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    index: int
    node: Formula
    expression: Tuple[str, ...]
    verdict: Verdict
    abbrev: str
    structural_reason: str = ''
    # introduced whole rather than derived; needs a derivation of its own
    assumed: bool = False

    @property
    def well_typed(self) -> bool:
        return self.verdict.well_typed and not self.structural_reason

    @property
    def reason(self) -> str:
        return self.structural_reason or self.verdict.reason

    @property
    def ill_word(self) -> Optional[str]:
        position = self.verdict.position
        if self.verdict.well_typed or position is None or position >= len(self.expression):
            return None
        return self.expression[position]


@dataclass(frozen=True)
class Derivation:
    formula: Formula
    stages: Tuple[Stage, ...]
    status: str
    failed_stage: Optional[int] = None
    score: int = 0

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE

    def label(self) -> str:
        if self.status == DISQUALIFIED_STAGE:
            return f'DisqualifiedStage({self.failed_stage})'
        return 'Complete'


class _StageBuilder:
    """Collects (node, atoms introduced so far) pairs in valuation order."""

    def __init__(self, lex: Lexicon):
        self.lex = lex
        self.raw: List[Tuple[Formula, FrozenSet[int]]] = []
        self.valued_at: Dict[int, int] = {}
        self.seen: Set[int] = set()
        self.assumed: Set[int] = set()

    def push(self, node: Formula, new_atoms: Sequence[Atom]) -> int:
        self.seen.update(id(a) for a in new_atoms)
        self.raw.append((node, frozenset(self.seen)))
        return len(self.raw) - 1

    def mark(self, f: Formula, index: int) -> None:
        for g in complex_subformulas(f):
            self.valued_at.setdefault(id(g), index)

    def folds(self, node: Application) -> bool:
        # Y(F(x)): the marker is valued with F(x), attaching to F
        return (isinstance(node.head, Atom) and is_marker(self.lex, node.head.symbol.text)
                and len(node.args) == 1 and isinstance(node.args[0], Application)
                and not any(g.grouped for g in subformulas(node.args[0].head)))

    def value(self, node: Formula) -> None:
        if isinstance(node, Atom):
            self.valued_at[id(node)] = self.push(node, [node])
            return
        if self.folds(node):
            self.value(node.args[0])
            self.seen.add(id(node.head))
            self.raw[-1] = (node, frozenset(self.seen))
            self.valued_at[id(node)] = len(self.raw) - 1
            return

        order = argument_order(node.args)
        self.value(order[0])
        pending: List[Atom] = []
        folded: List[Formula] = []
        for arg in order[1:]:
            if isinstance(arg, Atom) or _is_flat(arg):
                pending.extend(atoms(arg))
                folded.append(arg)
            else:
                # a complex co-argument enters whole
                whole = self.push(arg, atoms(arg))
                self.assumed.add(whole)
                self.mark(arg, whole)
        index = self.push(node, pending + atoms(node.head))
        self.valued_at[id(node)] = index
        for arg in folded:
            self.mark(arg, index)
        self.mark(node.head, index)


def _check_lexicon(f: Formula, lex: Lexicon) -> None:
    for a in atoms(f):
        if not entries_for_symbol(lex, a.symbol.text):
            raise UnknownWord(symbol_surface(lex, a.symbol.text))
    for g in complex_subformulas(f):
        if isinstance(g.head, Atom):
            arity = entries_for_symbol(lex, g.head.symbol.text)[0].arity
            if arity != len(g.args):
                raise ArityMismatch(str(g.head.symbol), arity, len(g.args))


def _grouped_in_chain(f: Formula, tops: Dict[int, Application], valued_at: Dict[int, int],
                      final_index: List[int]) -> Set[int]:
    """Stages consuming a chain A(x)(..(y)..) with a bracketed term in argument position."""
    flagged: Set[int] = set()
    for g in complex_subformulas(f):
        if not isinstance(g.head, Application) or g.head.grouped:
            continue
        if not any(h.grouped for arg in g.args for h in subformulas(arg)):
            continue
        top = tops.get(id(g))
        if top is not None and id(top) in valued_at:
            flagged.add(final_index[valued_at[id(top)]])
    return flagged


def derive(f: Formula, lex: Lexicon, rs: RuleSet) -> Derivation:
    """Derive f stage by stage and check every stage expression.

    Stages whose expression repeats the previous one are merged. Score is
    the number of well-typed stages that were derived rather than assumed;
    a single ill-typed stage disqualifies, assumed or not.
    """
    _check_lexicon(f, lex)
    if isinstance(f, Atom):
        return Derivation(f, (), COMPLETE, None, 0)

    tops: Dict[int, Application] = {}
    read = _read(f, tops)
    builder = _StageBuilder(lex)
    builder.value(read)

    merged: List[Tuple[Formula, Tuple[str, ...], bool]] = []
    final_index: List[int] = []
    for k, (node, introduced) in enumerate(builder.raw):
        segments = _Realizer(lex, rs, introduced).realize(read)
        words = tuple(word for segment in segments for word in segment)
        entry = (node, words, k in builder.assumed)
        if merged and merged[-1][1] == words:
            merged[-1] = entry
        else:
            merged.append(entry)
        final_index.append(len(merged))

    flagged = _grouped_in_chain(f, tops, builder.valued_at, final_index)
    stages = tuple(Stage(k, node, words, check_well_typed(words, lex, rs), abbreviate(words),
                         GROUPED_IN_CHAIN if k in flagged else '', assumed)
                   for k, (node, words, assumed) in enumerate(merged, 1))

    failed = next((stage.index for stage in stages if not stage.well_typed), None)
    score = sum(1 for stage in stages if stage.well_typed and not stage.assumed)
    status = COMPLETE if failed is None else DISQUALIFIED_STAGE
    logger.debug('derived %d stages, %s', len(stages), status)
    return Derivation(f, stages, status, failed, score)


def score(d: Derivation) -> int:
    return d.score


def stage_chain(d: Derivation, abbreviated: bool = True) -> str:
    """`m > tm > tmw`; stages that abbreviate like a neighbour are written out."""
    full = [' '.join(stage.expression) for stage in d.stages]
    if not abbreviated:
        return ' > '.join(full)
    short = [stage.abbrev for stage in d.stages]
    parts = []
    for i, text in enumerate(short):
        clash = (i > 0 and short[i - 1] == text) or (i + 1 < len(short) and short[i + 1] == text)
        parts.append(full[i] if clash else text)
    return ' > '.join(parts)


@dataclass(frozen=True)
class DiscourseDerivation:
    """Sentences derived one after another; the discourse score sums theirs."""
    derivations: Tuple[Derivation, ...]

    @property
    def failed_sentence(self) -> Optional[int]:
        return next((k for k, d in enumerate(self.derivations, 1) if not d.complete), None)

    @property
    def complete(self) -> bool:
        return self.failed_sentence is None

    @property
    def status(self) -> str:
        return COMPLETE if self.complete else DISQUALIFIED_STAGE

    @property
    def score(self) -> int:
        return sum(d.score for d in self.derivations)

    def label(self) -> str:
        if self.complete:
            return 'Complete'
        d = self.derivations[self.failed_sentence - 1]
        return f'DisqualifiedSentence({self.failed_sentence}): {d.label()}'


def derive_discourse(formulas: Sequence[Formula], lex: Lexicon, rs: RuleSet) -> DiscourseDerivation:
    """Derive each sentence of a discourse in order."""
    derivations = tuple(derive(f, lex, rs) for f in formulas)
    report = DiscourseDerivation(derivations)
    logger.debug('derived a discourse of %d sentences, %s', len(derivations), report.status)
    return report


# ---------------------------------------------------------------------------
# Adjudication
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Adjudication:
    candidates: Tuple[Dict[str, Any], ...]
    winners: Tuple[str, ...]

    def ranking(self) -> List[Dict[str, Any]]:
        ranked = [item for item in self.candidates if item['status'] == COMPLETE]
        return sorted(ranked, key=lambda item: (-item['score'], item['index']))


def evaluate_candidate(index: int, label: str, text: str, lex: Lexicon, rs: RuleSet) -> Dict[str, Any]:
    item: Dict[str, Any] = {
        'kind': 'candidate', 'index': index, 'label': label, 'formula': text,
        'status': None, 'score': None, 'stage': None, 'word': None, 'chain': '', 'reason': '',
    }
    try:
        f = parse_formula(text)
    except FormulaSyntaxError as exc:
        item.update(status=DISQUALIFIED_SYNTAX, reason=str(exc))
        return item
    try:
        d = derive(f, lex, rs)
    except MorphotypeError as exc:
        item.update(status=REJECTED, reason=str(exc))
        return item

    item.update(status=d.status, chain=stage_chain(d))
    if d.complete:
        item['score'] = d.score
    else:
        stage = d.stages[d.failed_stage - 1]
        item.update(stage=stage.index, word=stage.ill_word, reason=stage.reason)
    return item


def adjudicate(candidates: Sequence[str], lex: Lexicon, rs: RuleSet,
               labels: Optional[Sequence[str]] = None, n_jobs: int = 1) -> Adjudication:
    """Classify every candidate formula and rank the completely derivable ones by score.

    Ties at the top score are all winners. Report items keep input order.
    """
    if not candidates:
        raise EmptyCandidateList()
    labels = list(labels) if labels else [str(i) for i in range(1, len(candidates) + 1)]

    items = Parallel(n_jobs=n_jobs)(
        delayed(evaluate_candidate)(i, label, text, lex, rs)
        for i, (label, text) in enumerate(zip(labels, candidates), 1))

    scores = sorted({item['score'] for item in items if item['status'] == COMPLETE}, reverse=True)
    for item in items:
        item['rank'] = scores.index(item['score']) + 1 if item['status'] == COMPLETE else None
        item['winner'] = item['rank'] == 1
    winners = tuple(item['label'] for item in items if item['winner'])
    logger.info('adjudicated %d candidates, winner(s): %s', len(items), ', '.join(winners) or 'none')
    return Adjudication(tuple(items), winners)

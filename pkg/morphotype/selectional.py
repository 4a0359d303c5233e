"""
Morphotype - Selectional Restrictions

Checks capital-subscript restrictions such as READ_{I,S}(x,y) against
the semantic tags of argument heads, and applies the metaphor rule: an
ill-restricted X(y) is interpretable through some Z mapped onto X when
Z(y) is fine, giving the judgement [[Z(y)]] <: [[X(y)]].
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple, Union

from morphotype.formula_syntax import (Application, ArityMismatch, Atom, Formula, MissingTags, Symbol,
                                       complex_subformulas, format_formula)
from morphotype.lexicon import Lexicon, arity_of, entries_for_symbol, is_marker, semantic_tags, tag_closure

logger = logging.getLogger(__name__)

# heads that wrap an argument without being its semantic head
WRAPPER_TYPES = frozenset({'DET', 'DEM', 'D', 'NUM', 'Q', 'GEN', 'POS', 'ADP', 'CA', 'A', 'ADV', 'ADL', 'PCJ'})


@dataclass(frozen=True)
class RestrictionSignature:
    relation: Symbol
    slots: Tuple[str, ...]


@dataclass(frozen=True)
class RestrictionViolation:
    relation: str
    position: int
    required: str
    found: FrozenSet[str]
    argument: str
    node: Optional[Application] = field(default=None, compare=False)

    def describe(self) -> str:
        found = ','.join(sorted(self.found)) or 'none'
        return f'{self.relation} slot {self.position + 1} needs {self.required}, {self.argument} has {found}'


@dataclass(frozen=True)
class RestrictionVerdict:
    violations: Tuple[RestrictionViolation, ...] = ()

    @property
    def satisfied(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class CoercionRecord:
    original: Formula
    replaced_relation: Symbol
    substituted_relation: Symbol
    argument: Formula
    source_tags: Tuple[str, ...]
    target_tags: Tuple[str, ...]
    interpretation_note: str


@dataclass(frozen=True)
class CoercionFailure:
    reason: str


def _is_wrapper(head: Formula, lex: Lexicon) -> bool:
    if isinstance(head, Application):
        # (GEN(he))(x): the possessed x is the head
        return isinstance(head.head, Atom) and is_marker(lex, head.head.symbol.text)
    if is_marker(lex, head.symbol.text):
        return True
    names = set()
    for entry in entries_for_symbol(lex, head.symbol.text):
        names |= entry.type_names
    return bool(names) and names <= WRAPPER_TYPES


def argument_head(f: Formula, lex: Lexicon) -> Atom:
    """The atom whose tags stand for argument f: THE(spruce) -> spruce, RED(ideas) -> ideas."""
    while isinstance(f, Application):
        if _is_wrapper(f.head, lex):
            f = f.args[0]
        elif isinstance(f.head, Atom):
            return f.head
        else:
            f = f.head
    return f


def signature(node: Application, lex: Lexicon) -> Optional[RestrictionSignature]:
    if not isinstance(node.head, Atom) or not node.head.symbol.restrictions:
        return None
    sym = node.head.symbol
    arity = arity_of(lex, sym.text)
    if arity is not None and len(sym.restrictions) > arity:
        raise ArityMismatch(str(sym), arity, len(sym.restrictions))
    return RestrictionSignature(sym, sym.restrictions)


def check_restrictions(f: Formula, lex: Lexicon) -> RestrictionVerdict:
    """Every restricted slot's argument head must carry the slot's tag (or a subtag)."""
    violations = []
    for node in complex_subformulas(f):
        sig = signature(node, lex)
        if sig is None:
            continue
        for position, (required, arg) in enumerate(zip(sig.slots, node.args)):
            head = argument_head(arg, lex)
            own = semantic_tags(lex, head.symbol.text)
            if not own:
                raise MissingTags(str(head.symbol))
            found = tag_closure(lex, own)
            if required not in found:
                violations.append(RestrictionViolation(str(sig.relation), position, required,
                                                       own, head.symbol.text, node))
    logger.debug('%s: %d restriction violation(s)', format_formula(f), len(violations))
    return RestrictionVerdict(tuple(violations))


def _bare(sym: Symbol) -> Symbol:
    return Symbol(sym.text, sym.coref_index)


def coerce(f: Formula, lex: Lexicon) -> Union[CoercionRecord, CoercionFailure]:
    """Single-step metaphor coercion of the first violated relation in f.

    The original formula stays ill-typed; the record only licenses an
    interpretation.
    """
    verdict = check_restrictions(f, lex)
    if verdict.satisfied:
        return CoercionFailure('formula satisfies its restrictions; nothing to coerce')

    node = verdict.violations[0].node
    relation = node.head.symbol
    for source, target in lex.metaphor_map.items():
        if target != relation.text:
            continue
        substitute = Symbol(source, relation.coref_index)
        candidate = Application(Atom(substitute), node.args)
        if not check_restrictions(candidate, lex).satisfied:
            continue
        argument = node.args[0] if len(node.args) == 1 else node
        plain = Application(Atom(_bare(relation)), node.args)
        note = f'⟦{format_formula(candidate)}⟧ <: ⟦{format_formula(plain)}⟧'
        logger.debug('coerced %s via %s', format_formula(node), source)
        return CoercionRecord(f, relation, substitute, argument, substitute.restrictions,
                              relation.restrictions, note)
    return CoercionFailure(f'no metaphor maps a relation onto {relation.text} that fits its argument')

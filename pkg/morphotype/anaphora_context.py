"""
Morphotype - Coreference and Contexts

Groups coindexed atoms into chains, classifies dummy and unresolved
pronouns, checks that agreement markers find their coindexed argument,
and builds contexts of typing judgements from derivations: each stage of
a sentence contributes `expression : formula`, depending on everything
judged before it. A discourse of several sentences becomes one
supersequence with the later sentences' contexts nested inside it.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

from morphotype.formula_syntax import Application, Atom, Formula, IllTypedSentence, Symbol, atoms, format_formula
from morphotype.lexicon import Lexicon, entries_for_symbol, is_marker, lookup, symbol_surface
from morphotype.type_system import RuleSet
from morphotype.derivation import derive_discourse, realize

logger = logging.getLogger(__name__)

POINTER_TYPES = frozenset({'PRO', 'C'})


@dataclass(frozen=True)
class CorefReport:
    chains: Dict[str, Tuple[Atom, ...]] = field(default_factory=dict)
    dummies: Tuple[Atom, ...] = ()
    unresolved: Tuple[Atom, ...] = ()
    agreement: Tuple[Dict[str, Any], ...] = ()

    def chain_texts(self) -> Dict[str, List[str]]:
        return {index: [str(a.symbol) for a in members] for index, members in sorted(self.chains.items())}


def _type_names(a: Atom, lex: Lexicon) -> frozenset:
    names = set()
    for entry in entries_for_symbol(lex, a.symbol.text):
        names |= entry.type_names
    return frozenset(names)


def _is_pointer(a: Atom, lex: Lexicon) -> bool:
    return bool(_type_names(a, lex) & POINTER_TYPES)


def _is_dummy_word(a: Atom, lex: Lexicon) -> bool:
    return any('dummy_pronoun' in entry.flags for entry in lookup(lex, symbol_surface(lex, a.symbol.text)))


def _resolve(found: Sequence[Atom], lex: Lexicon) -> CorefReport:
    chains: Dict[str, List[Atom]] = {}
    for a in found:
        if a.symbol.coref_index:
            chains.setdefault(a.symbol.coref_index, []).append(a)

    dummies, unresolved = [], []
    for a in found:
        if not _is_pointer(a, lex):
            continue
        members = chains.get(a.symbol.coref_index, []) if a.symbol.coref_index else []
        referential = [m for m in members
                       if not is_marker(lex, m.symbol.text) and not _is_pointer(m, lex)]
        if _is_dummy_word(a, lex) and not referential:
            dummies.append(a)
        elif len(members) < 2:
            unresolved.append(a)
    return CorefReport({index: tuple(members) for index, members in chains.items()},
                       tuple(dummies), tuple(unresolved))


def check_agreement(f: Formula, lex: Lexicon) -> List[Dict[str, Any]]:
    """An indexed marker needs a coindexed argument in the same sentence."""
    found = atoms(f)
    findings = []
    for a in found:
        index = a.symbol.coref_index
        if not index or not is_marker(lex, a.symbol.text):
            continue
        partners = [m for m in found if m.symbol.coref_index == index and not is_marker(lex, m.symbol.text)]
        if not partners:
            findings.append({'kind': 'agreement', 'symbol': str(a.symbol), 'index': index,
                             'reason': f'marker {a.symbol} has no argument indexed {index} in its sentence'})
    return findings


def resolve_coreference(f: Formula, lex: Lexicon) -> CorefReport:
    report = _resolve(atoms(f), lex)
    return CorefReport(report.chains, report.dummies, report.unresolved, tuple(check_agreement(f, lex)))


# ---------------------------------------------------------------------------
# Contexts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Judgement:
    term: str
    type: Formula
    dependencies: Tuple[int, ...]
    sentence: int

    def render(self) -> str:
        return f'{self.term} : {format_formula(self.type)}'


@dataclass(frozen=True)
class Context:
    judgements: Tuple[Judgement, ...] = ()
    sentence_boundaries: Tuple[int, ...] = ()
    sentences: Tuple[str, ...] = ()
    formulas: Tuple[Formula, ...] = ()
    coreference: CorefReport = field(default_factory=CorefReport)

    def sentence_judgements(self, k: int) -> Tuple[Judgement, ...]:
        """Judgements of Γ_k, 1-based."""
        return tuple(j for j in self.judgements if j.sentence == k)


def _strip(f: Formula, lex: Lexicon) -> Formula:
    # indices stay on pronouns and complementizers only
    if isinstance(f, Atom):
        if not f.symbol.coref_index or _is_pointer(f, lex):
            return f
        return Atom(Symbol(f.symbol.text, None, f.symbol.restrictions), f.span, f.grouped)
    return Application(_strip(f.head, lex), tuple(_strip(arg, lex) for arg in f.args), f.span, f.grouped)


def build_context(discourse: Sequence[Formula], lex: Lexicon, rs: RuleSet) -> Context:
    """One judgement per derivation stage, sentence after sentence.

    Raises IllTypedSentence when a sentence does not derive completely.
    """
    derived = derive_discourse(discourse, lex, rs)
    if not derived.complete:
        k = derived.failed_sentence
        d = derived.derivations[k - 1]
        stage = d.stages[d.failed_stage - 1]
        raise IllTypedSentence(k, f'stage {stage.index} ({" ".join(stage.expression)}): {stage.reason}')

    judgements: List[Judgement] = []
    boundaries, sentences = [], []
    for k, (f, d) in enumerate(zip(discourse, derived.derivations), 1):
        boundaries.append(len(judgements))
        pairs = [(' '.join(stage.expression), stage.node) for stage in d.stages]
        if not pairs:
            pairs = [(' '.join(realize(f, lex, rs)), f)]
        for i, (term, node) in enumerate(pairs):
            final = i == len(pairs) - 1
            judgements.append(Judgement(term, f if final else _strip(node, lex),
                                        tuple(range(len(judgements))), k))
        sentences.append(pairs[-1][0])

    found = [a for f in discourse for a in atoms(f)]
    report = _resolve(found, lex)
    agreement = tuple(item for f in discourse for item in check_agreement(f, lex))
    coreference = CorefReport(report.chains, report.dummies, report.unresolved, agreement)
    logger.debug('context of %d sentences, %d judgements', len(sentences), len(judgements))
    return Context(tuple(judgements), tuple(boundaries), tuple(sentences), tuple(discourse), coreference)


def render_sentence_context(ctx: Context, k: int) -> str:
    items = ', '.join(j.render() for j in ctx.sentence_judgements(k))
    return f'Γ_{k} = ({items})'


def render_context(ctx: Context) -> str:
    """`Γ = (...)`; later sentences nest inside the judgement for the whole discourse."""
    if not ctx.judgements:
        return 'Γ = ()'
    items = [j.render() for j in ctx.sentence_judgements(1)]
    if len(ctx.sentences) > 1:
        whole = '"' + '; '.join(ctx.sentences) + '"'
        nested = [format_formula(ctx.formulas[0])]
        for k in range(2, len(ctx.sentences) + 1):
            nested.append('(' + ', '.join(j.render() for j in ctx.sentence_judgements(k)) + ')')
        items.append(f'{whole} : ' + '; '.join(nested))
    return 'Γ = (' + ', '.join(items) + ')'

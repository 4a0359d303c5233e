"""
Morphotype - Command Line Interface
click front end over the library. Human output mirrors the notation of
the analyses (stage chains, Γ lists); --structured prints one JSON
record per line instead.

Exit codes: 0 success, 1 ill-typed or ill-formed input, 2 usage or file error.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import click
import pandas as pd
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from morphotype.formula_syntax import (FormulaSyntaxError, MorphotypeError, format_formula,
                                       parse_formula, subformulas, to_sigma)
from morphotype.lexicon import Lexicon, load_lexicon_file, validate_lexicon
from morphotype.type_system import RuleSet, audit_rules, check_well_typed, load_rules_file, rule_table
from morphotype.selectional import CoercionRecord, check_restrictions, coerce
from morphotype.derivation import Derivation, adjudicate, derive_discourse, stage_chain
from morphotype.anaphora_context import build_context, render_context, render_sentence_context
from morphotype.quantifier_composition import eval_numeral

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')
DEFAULT_LEXICON = os.path.join(DATA_DIR, 'english.lex')
DEFAULT_RULES = os.path.join(DATA_DIR, 'english.rules')

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    lexicon_path: str = DEFAULT_LEXICON
    rules_path: str = DEFAULT_RULES
    structured: bool = False
    jobs: int = 1
    _lexicon: Optional[Lexicon] = field(default=None, repr=False)
    _rules: Optional[RuleSet] = field(default=None, repr=False)

    @property
    def lexicon(self) -> Lexicon:
        if self._lexicon is None:
            self._lexicon = _load(load_lexicon_file, self.lexicon_path)
        return self._lexicon

    @property
    def rules(self) -> RuleSet:
        if self._rules is None:
            self._rules = _load(load_rules_file, self.rules_path)
        return self._rules


class FileProblem(click.ClickException):
    exit_code = EXIT_USAGE


def _load(loader, path: str):
    try:
        return loader(path)
    except (OSError, MorphotypeError) as e:
        raise FileProblem(f'{path}: {e}') from e


def _jobs() -> int:
    try:
        return max(1, int(os.getenv('MORPHOTYPE_JOBS', '1')))
    except ValueError:
        return 1


def log_level(verbose: bool) -> Tuple[str, Optional[str]]:
    """Level name to configure, plus the rejected setting when MORPHOTYPE_LOG_LEVEL is not a level."""
    if verbose:
        return 'DEBUG', None
    name = os.getenv('MORPHOTYPE_LOG_LEVEL', 'WARNING').strip().upper()
    if isinstance(logging.getLevelName(name), int):
        return name, None
    return 'WARNING', name


def emit(config: RunConfig, record: Dict[str, Any], human: Optional[str] = None) -> None:
    if config.structured:
        click.echo(json.dumps(record, ensure_ascii=False, default=str))
    elif human is not None:
        click.echo(human)


def fail(config: RunConfig, error: Exception, code: int = EXIT_VERDICT) -> None:
    if config.structured:
        click.echo(json.dumps({'kind': 'error', 'error': str(error)}, ensure_ascii=False))
    else:
        click.echo(f'error: {error}', err=True)
    raise SystemExit(code)


def table(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    if not rows:
        return '(none)'
    rows = [{key: '' if value is None else value for key, value in row.items()} for row in rows]
    return pd.DataFrame(rows, columns=columns).to_string(index=False)


def read_lines(path: str) -> List[Tuple[int, str]]:
    """Non-blank, non-comment lines; UTF-8, CRLF tolerated."""
    with open(path, encoding='utf-8', newline=None) as fh:
        lines = [(n, line.strip()) for n, line in enumerate(fh, 1)]
    return [(n, line) for n, line in lines if line and not line.startswith('#')]


@click.group()
@click.option('--lexicon', 'lexicon_path', type=click.Path(dir_okay=False),
              envvar='MORPHOTYPE_LEXICON', default=DEFAULT_LEXICON, show_default=True, help='Lexicon file.')
@click.option('--rules', 'rules_path', type=click.Path(dir_okay=False),
              envvar='MORPHOTYPE_RULES', default=DEFAULT_RULES, show_default=True, help='Rule file.')
@click.option('--structured', is_flag=True, help='One JSON record per line.')
@click.option('--verbose', is_flag=True, help='Debug logging.')
@click.pass_context
def main(ctx: click.Context, lexicon_path: str, rules_path: str, structured: bool, verbose: bool) -> None:
    """Morphosyntactic formulas: parse, type-check, derive, adjudicate."""
    level, unknown = log_level(verbose)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    if unknown:
        logger.warning('unknown MORPHOTYPE_LOG_LEVEL %r, using WARNING', unknown)
    ctx.obj = RunConfig(lexicon_path, rules_path, structured, _jobs())


@main.command()
@click.argument('formula')
@click.option('--sigma', is_flag=True, help='Render as Σ(head, args).')
@click.option('--subformulas', 'list_subformulas', is_flag=True, help='List every subformula.')
@click.pass_obj
def parse(config: RunConfig, formula: str, sigma: bool, list_subformulas: bool) -> None:
    """Parse FORMULA and print it back."""
    try:
        f = parse_formula(formula)
    except FormulaSyntaxError as e:
        if not config.structured:
            start, end = e.span
            click.echo(formula, err=True)
            click.echo(' ' * start + '^' * max(1, end - start), err=True)
        fail(config, e)
    parts = [format_formula(g) for g in subformulas(f)]
    record = {'kind': 'formula', 'formula': format_formula(f), 'sigma': to_sigma(f), 'subformulas': parts}
    human = to_sigma(f) if sigma else format_formula(f)
    if list_subformulas:
        human = '\n'.join(parts)
    emit(config, record, human)


@main.command()
@click.argument('words')
@click.option('--formula', 'formula_text', default=None, help='Formula whose restrictions to check.')
@click.pass_obj
def check(config: RunConfig, words: str, formula_text: Optional[str]) -> None:
    """Well-typedness of WORDS, plus selectional restrictions of --formula."""
    lex, rs = config.lexicon, config.rules
    try:
        verdict = check_well_typed(words.split(), lex, rs)
    except MorphotypeError as e:
        fail(config, e)
    record: Dict[str, Any] = {'kind': 'check', 'expression': words, 'verdict': verdict.label(),
                              'wf_types': sorted(verdict.primary), 'reason': verdict.reason,
                              'position': verdict.position}
    lines = [f'verdict: {verdict.label()}']
    if verdict.reason:
        lines.append(f'reason: {verdict.reason}')
    ok = verdict.well_typed

    if formula_text:
        try:
            f = parse_formula(formula_text)
            restrictions = check_restrictions(f, lex)
        except MorphotypeError as e:
            fail(config, e)
        record['restrictions'] = [v.describe() for v in restrictions.violations]
        if restrictions.satisfied:
            lines.append('restrictions: satisfied')
        else:
            ok = False
            lines.append('restrictions: ' + '; '.join(v.describe() for v in restrictions.violations))
            outcome = coerce(f, lex)
            if isinstance(outcome, CoercionRecord):
                record['coercion'] = outcome.interpretation_note
                lines.append(f'coercion: {outcome.interpretation_note}')
            else:
                record['coercion_failure'] = outcome.reason
                lines.append(f'coercion: none ({outcome.reason})')
    emit(config, record, '\n'.join(lines))
    if not ok:
        raise SystemExit(EXIT_VERDICT)


def _stage_rows(d: Derivation) -> List[Dict[str, Any]]:
    rows = []
    for s in d.stages:
        verdict = s.verdict.label() if s.well_typed else 'ill'
        rows.append({'stage': s.index, 'expression': ' '.join(s.expression), 'formula': format_formula(s.node),
                     'verdict': f'{verdict} (assumed)' if s.assumed else verdict,
                     'reason': s.reason if not s.well_typed else '', 'assumed': s.assumed})
    return rows


@main.command('derive')
@click.argument('formulas', nargs=-1, required=True)
@click.option('--abbrev', is_flag=True, help='Print the stage chain abbreviated (m > tm > ...).')
@click.pass_obj
def derive_command(config: RunConfig, formulas: Tuple[str, ...], abbrev: bool) -> None:
    """Derive each FORMULA stage by stage; several formulas are one discourse."""
    try:
        report = derive_discourse([parse_formula(text) for text in formulas], config.lexicon, config.rules)
    except MorphotypeError as e:
        fail(config, e)
    several = len(report.derivations) > 1
    for k, d in enumerate(report.derivations, 1):
        rows = _stage_rows(d)
        extra = {'sentence': k} if several else {}
        if config.structured:
            for row in rows:
                emit(config, dict(kind='stage', **extra, **row))
        summary = {'kind': 'derivation', **extra, 'status': d.label(), 'score': d.score,
                   'chain': stage_chain(d), 'full_chain': stage_chain(d, abbreviated=False)}
        head = stage_chain(d) if abbrev else table(rows, ['stage', 'expression', 'formula', 'verdict', 'reason'])
        text = f'{head}\n{d.label()}, score {d.score}'
        emit(config, summary, f'sentence {k}: {text}' if several else text)
    if several:
        emit(config, {'kind': 'discourse', 'sentences': len(report.derivations), 'status': report.label(),
                      'score': report.score}, f'discourse: {report.label()}, score {report.score}')
    if not report.complete:
        raise SystemExit(EXIT_VERDICT)


def _candidate_lines(path: str) -> Tuple[List[str], List[str]]:
    labels, texts = [], []
    for n, line in read_lines(path):
        label, sep, text = line.partition(':')
        if not sep:
            label, text = str(n), line
        labels.append(label.strip())
        texts.append(text.strip())
    return labels, texts


@main.command('adjudicate')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def adjudicate_command(config: RunConfig, path: str) -> None:
    """Rank the candidate formulas in PATH (`label: formula` per line)."""
    labels, texts = _candidate_lines(path)
    try:
        result = adjudicate(texts, config.lexicon, config.rules, labels=labels, n_jobs=config.jobs)
    except MorphotypeError as e:
        fail(config, e)
    if config.structured:
        for item in result.candidates:
            emit(config, item)
    columns = ['label', 'status', 'score', 'rank', 'stage', 'word', 'chain']
    winners = ', '.join(result.winners) or 'none'
    emit(config, {'kind': 'adjudication', 'winners': list(result.winners)},
         f'{table(list(result.candidates), columns)}\nwinner: {winners}')
    if not result.winners:
        raise SystemExit(EXIT_VERDICT)


@main.command('context')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def context_command(config: RunConfig, path: str) -> None:
    """Build the context of the discourse in PATH, one formula per sentence."""
    try:
        discourse = [parse_formula(line) for _, line in read_lines(path)]
        ctx = build_context(discourse, config.lexicon, config.rules)
    except MorphotypeError as e:
        fail(config, e)
    lines = [render_context(ctx)]
    if len(ctx.sentences) > 1:
        lines.extend(render_sentence_context(ctx, k) for k in range(1, len(ctx.sentences) + 1))
    coref = ctx.coreference
    for index, members in coref.chain_texts().items():
        lines.append(f'chain {index}: {", ".join(members)}')
    for a in coref.dummies:
        lines.append(f'dummy: {a.symbol}')
    for a in coref.unresolved:
        lines.append(f'unresolved: {a.symbol}')
    for item in coref.agreement:
        lines.append(f'agreement: {item["reason"]}')
    record = {'kind': 'context', 'context': render_context(ctx),
              'sentences': [render_sentence_context(ctx, k) for k in range(1, len(ctx.sentences) + 1)],
              'judgements': [{'term': j.term, 'type': format_formula(j.type), 'dependencies': list(j.dependencies)}
                             for j in ctx.judgements],
              'chains': coref.chain_texts(), 'dummies': [str(a.symbol) for a in coref.dummies],
              'unresolved': [str(a.symbol) for a in coref.unresolved], 'agreement': list(coref.agreement)}
    emit(config, record, '\n'.join(lines))


@main.command()
@click.argument('words')
@click.pass_obj
def numeral(config: RunConfig, words: str) -> None:
    """Evaluate a numeral composition such as "eight thousand seven hundred fifty four"."""
    try:
        composition = eval_numeral(words, config.lexicon)
    except MorphotypeError as e:
        fail(config, e)
    record = {'kind': 'numeral', 'tokens': list(composition.tokens), 'structure': composition.render(),
              'value': composition.value}
    human = composition.render()
    if composition.value is not None:
        human += f'\n{composition.value}'
    emit(config, record, human)


@main.group()
def lexicon() -> None:
    """Lexicon files."""


@lexicon.command('validate')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def lexicon_validate(config: RunConfig, path: str) -> None:
    """Check the lexicon in PATH against its invariants."""
    try:
        lex = load_lexicon_file(path)
    except MorphotypeError as e:
        fail(config, e)
    findings = validate_lexicon(lex, config.rules)
    for item in findings:
        emit(config, item)
    emit(config, {'kind': 'summary', 'entries': len(lex), 'findings': len(findings)},
         None if config.structured else _findings_text(findings, f'{len(lex)} entries'))
    if findings:
        raise SystemExit(EXIT_VERDICT)


def _findings_text(findings: List[Dict[str, Any]], subject: str) -> str:
    if not findings:
        return f'{subject}, no findings'
    lines = [f'{subject}, {len(findings)} finding(s):']
    for item in findings:
        details = ', '.join(f'{k}={v}' for k, v in item.items() if k != 'kind')
        lines.append(f'  {item["kind"]}: {details}')
    return '\n'.join(lines)


@main.group()
def rules() -> None:
    """Rule files."""


def _rule_set(config: RunConfig, path: Optional[str]) -> RuleSet:
    return _load(load_rules_file, path) if path else config.rules


@rules.command('show')
@click.argument('path', required=False, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def rules_show(config: RunConfig, path: Optional[str]) -> None:
    """List the rules with their universality marks."""
    rows = rule_table(_rule_set(config, path))
    if config.structured:
        for row in rows:
            emit(config, dict(kind='rule', **{k: v for k, v in row.items() if k != 'kind'}, rule_kind=row['kind']))
        return
    click.echo(table(rows, ['line', 'rule', 'kind', 'universality', 'incomplete']))


@rules.command('audit')
@click.argument('path', required=False, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def rules_audit(config: RunConfig, path: Optional[str]) -> None:
    """Check typing irreflexivity, the subsumption chain and declared names."""
    rs = _rule_set(config, path)
    findings = audit_rules(rs)
    for item in findings:
        emit(config, item)
    emit(config, {'kind': 'summary', 'rules': len(rs.rules), 'findings': len(findings)},
         None if config.structured else _findings_text(findings, f'{len(rs.rules)} rules'))
    if findings:
        raise SystemExit(EXIT_VERDICT)


if __name__ == '__main__':
    main()

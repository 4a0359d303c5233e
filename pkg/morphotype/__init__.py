"""
Morphotype - Morphosyntactic Formulas
A logic of morphosyntactic types for natural-language expressions:
formulas, a typed lexicon, rule-driven well-typedness, stage-by-stage
derivation and contexts.
"""

from morphotype.formula_syntax import (
    ArityConflict, ArityMismatch, Application, Atom, BadFlexeme, EmptyCandidateList, ForbiddenConArgument,
    Formula, FormulaSyntaxError, IllTypedSentence, LexiconParseError, MissingTags, MorphotypeError,
    NotANumeral, PatternSyntaxError, Symbol, UnknownType, UnknownWord, format_formula, parse_formula,
    subformulas, to_sigma,
)
from morphotype.lexicon import Lexicon, LexiconEntry, load_lexicon, load_lexicon_file, lookup, validate_lexicon
from morphotype.type_system import (RuleSet, check_well_typed, load_rules, load_rules_file, match_pattern,
                                    parse_type_pattern, resolve_flexeme, subtype)
from morphotype.selectional import check_restrictions, coerce
from morphotype.derivation import (adjudicate, derive, derive_discourse, realize, score, stage_chain,
                                   valuation_order)
from morphotype.anaphora_context import build_context, render_context, resolve_coreference
from morphotype.quantifier_composition import analyze_self_composition, eval_numeral, serialize_conc

__version__ = '0.1.0'

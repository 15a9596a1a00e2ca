from .engine import (
    LEVELS,
    AttackConfig,
    AttackResult,
    AttackTarget,
    Edit,
    attack,
    body_protected_spans,
    distractor_table,
    rank_word_importance,
    style_table,
    tokenize,
)
from .perturb import EDITS, perturb_char, single_edits
from .providers import LexiconProvider, register_provider, word_candidates

__all__ = [
    "EDITS",
    "LEVELS",
    "AttackConfig",
    "AttackResult",
    "AttackTarget",
    "Edit",
    "LexiconProvider",
    "attack",
    "body_protected_spans",
    "distractor_table",
    "perturb_char",
    "rank_word_importance",
    "register_provider",
    "single_edits",
    "style_table",
    "tokenize",
    "word_candidates",
]

"""Greedy adversarial search over prompt instructions.

The attacked text is a template body. Placeholders and label words are off
limits, so every perturbation lands in the instruction itself; each candidate
body is scored by rendering it for every record of the evaluation subset and
counting correct answers. One scoring pass costs ``len(subset)`` model
queries and the number of passes is capped by ``query_budget``.
"""
from __future__ import annotations

import math
import random
import re
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

import yaml

from ..datasets import DataRecord, load_dataset, load_fewshot_pool, sample_few_shot
from ..errors import BudgetTooSmall, ConfigError, NoAttackableWords
from ..models import GenerationParams, as_model, batch_generate
from ..pipeline.metrics import drop_rate
from ..pipeline.parsing import extract_freeform, normalize_freeform, process_output
from ..prompts import PLACEHOLDER, PromptTemplate, get_template, projection_spans, render
from .perturb import single_edits
from .providers import word_candidates

LEVELS = ("character", "word", "sentence", "semantic")
WORD = re.compile(r"\w+(?:'\w+)*")


@dataclass(frozen=True)
class AttackConfig:
    level: str
    query_budget: int = 50
    max_word_perturb_ratio: float = 0.3
    max_char_edits_per_word: int = 1
    eval_subset_size: int = 8
    seed: int = 0
    candidate_provider: str = "lexicon"
    max_candidates: int = 6

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ConfigError(f"attack level must be one of {LEVELS}, got {self.level!r}")
        if not 0 < self.max_word_perturb_ratio <= 1:
            raise ConfigError("max_word_perturb_ratio must lie in (0, 1]")
        if self.max_char_edits_per_word < 1 or self.eval_subset_size < 1 or self.max_candidates < 1:
            raise ConfigError("max_char_edits_per_word, eval_subset_size and max_candidates must be >= 1")

    def word_cap(self, n_words: int) -> int:
        # the epsilon keeps 0.3 * 10 from rounding up to 4
        return math.ceil(self.max_word_perturb_ratio * n_words - 1e-9)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AttackTarget:
    """A template plus what is needed to render and judge it."""

    template: PromptTemplate
    label_space: tuple = ()
    few_shot: tuple = ()
    freeform: bool = False
    dataset: str = ""

    @classmethod
    def for_dataset(cls, dataset: str, template_id: Optional[str] = None, seed: int = 0) -> "AttackTarget":
        from ..prompts import builtin_templates

        meta, records = load_dataset(dataset)
        template = get_template(dataset, template_id) if template_id else builtin_templates(dataset)[0]
        pool = load_fewshot_pool(dataset) or records
        shots = tuple(sample_few_shot(pool, template.shots, seed))
        return cls(template, tuple(meta.label_space), shots, meta.is_freeform, dataset)


@dataclass(frozen=True)
class Edit:
    position: int
    before: str
    after: str
    word_index: Optional[int] = None


@dataclass
class AttackResult:
    original_prompt: str
    perturbed_prompt: str
    level: str
    queries_used: int
    clean_score: float
    attacked_score: float
    drop_rate: float
    perturbation_log: list = field(default_factory=list)
    template_id: str = ""
    dataset: str = ""
    endpoint: str = ""
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["kind"] = "attack_result"
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "AttackResult":
        doc = {k: v for k, v in doc.items() if k != "kind"}
        doc["perturbation_log"] = [Edit(**e) for e in doc.get("perturbation_log", [])]
        return cls(**doc)


@dataclass(frozen=True)
class Token:
    index: int
    start: int
    end: int
    text: str
    protected: bool


def body_protected_spans(body: str, projection: dict) -> list[tuple[int, int]]:
    spans = [m.span() for m in PLACEHOLDER.finditer(body)]
    return sorted(spans + projection_spans(body, projection))


def tokenize(body: str, projection: dict) -> list[Token]:
    placeholders = [m.span() for m in PLACEHOLDER.finditer(body)]
    label_spans = projection_spans(body, projection)
    tokens = []
    for m in WORD.finditer(body):
        a, b = m.span()
        if any(a < pe and ps < b for ps, pe in placeholders):
            continue
        protected = any(a < pe and ps < b for ps, pe in label_spans)
        tokens.append(Token(len(tokens), a, b, m.group(0), protected))
    return tokens


def assemble(body: str, tokens: Sequence[Token], forms: dict) -> str:
    out, pos = [], 0
    for tok in tokens:
        if tok.index in forms:
            out.append(body[pos : tok.start])
            out.append(forms[tok.index])
            pos = tok.end
    out.append(body[pos:])
    return "".join(out)


def delete_token(body: str, tok: Token) -> str:
    a, b = tok.start, tok.end
    if a > 0 and body[a - 1] == " ":
        a -= 1
    elif b < len(body) and body[b] == " ":
        b += 1
    return body[:a] + body[b:]


def _match_case(candidate: str, like: str) -> str:
    if like.isupper() and len(like) > 1:
        return candidate.upper()
    if like[:1].isupper():
        return candidate[:1].upper() + candidate[1:]
    return candidate


class Scorer:
    """Scores candidate bodies on a fixed subset and enforces the budget."""

    def __init__(self, target: AttackTarget, model, params: GenerationParams, records: Sequence[DataRecord],
                 budget: Optional[int] = None, parallelism: int = 1):
        self.target = target
        self.model = model
        self.params = params
        self.records = list(records)
        self.budget = budget
        self.parallelism = parallelism
        self.evaluations = 0
        self._memo: dict[str, Fraction] = {}

    @property
    def queries_used(self) -> int:
        return self.evaluations * len(self.records)

    def can_score(self, body: Optional[str] = None) -> bool:
        if body is not None and body in self._memo:
            return True
        return self.budget is None or self.evaluations < self.budget

    def _correct(self, text: str, record: DataRecord) -> bool:
        if self.target.freeform:
            return extract_freeform(text) == normalize_freeform(record.label)
        return process_output(text, self.target.label_space, self.target.template.projection) == record.label

    def __call__(self, body: str) -> Fraction:
        if body in self._memo:
            return self._memo[body]
        if not self.can_score():
            raise BudgetTooSmall("query budget exhausted")
        template = self.target.template.with_body(body)
        prompts = [render(template, rec, self.target.few_shot).text for rec in self.records]
        self.evaluations += 1
        items = batch_generate(self.model, self.params, prompts, self.parallelism)
        for item in items:
            if not item.ok:
                raise item.error
        hits = sum(self._correct(item.text, rec) for item, rec in zip(items, self.records))
        value = Fraction(hits, len(self.records))
        self._memo[body] = value
        return value


def _rank(scorer: Scorer, body: str, tokens: Sequence[Token], clean: Fraction) -> list[tuple[int, Fraction]]:
    attackable = [t for t in tokens if not t.protected]
    if not attackable:
        raise NoAttackableWords("every word of the prompt is protected")
    scored, unscored = [], []
    for tok in attackable:
        probe = delete_token(body, tok)
        if scorer.can_score(probe):
            scored.append((tok.index, clean - scorer(probe)))
        else:
            unscored.append((tok.index, Fraction(0)))
    scored.sort(key=lambda p: (-p[1], p[0]))
    return scored + unscored


def rank_word_importance(target: AttackTarget, endpoint, eval_subset: Sequence[DataRecord],
                         params: Optional[GenerationParams] = None) -> list[tuple[int, float]]:
    """Leave-one-word-out importance of each attackable word, most important first.

    Importance is the clean score minus the score with the word deleted; ties
    keep position order.
    """
    body = target.template.body
    tokens = tokenize(body, target.template.projection)
    if not any(not t.protected for t in tokens):
        raise NoAttackableWords("every word of the prompt is protected")
    scorer = Scorer(target, as_model(endpoint), params or GenerationParams(), eval_subset)
    clean = scorer(body)
    return [(i, float(v)) for i, v in _rank(scorer, body, tokens, clean)]


@lru_cache(maxsize=1)
def distractor_table() -> tuple:
    res = resources.files("promptprobe") / "data" / "attacks" / "distractors.yaml"
    doc = yaml.safe_load(res.read_text())
    return tuple(s for family in doc.values() for s in family)


@lru_cache(maxsize=1)
def style_table() -> dict:
    res = resources.files("promptprobe") / "data" / "attacks" / "styles.yaml"
    return yaml.safe_load(res.read_text())


def label_word_sequence(text: str, projection: dict) -> list[str]:
    return [text[a:b].lower() for a, b in projection_spans(text, projection)]


def split_instruction(body: str) -> tuple[str, str]:
    cut = body.find("\n")
    if cut < 0:
        m = PLACEHOLDER.search(body)
        cut = m.start() if m else len(body)
    return body[:cut], body[cut:]


class _Search:
    def __init__(self, target: AttackTarget, config: AttackConfig, scorer: Scorer):
        self.target = target
        self.config = config
        self.scorer = scorer
        self.body = target.template.body
        self.log: list[Edit] = []

    def pick(self, candidates, current: Fraction):
        """Best strictly-improving (score, edits, text) among ``candidates``.

        ``candidates`` are (text, n_edits, payload) triples; they are scored in
        text order and the scan stops early at a zero score, which cannot be
        beaten.
        """
        best = None
        for text, n_edits, payload in sorted(candidates, key=lambda c: (c[1], c[0])):
            if not self.scorer.can_score(text):
                break
            s = self.scorer(text)
            if s < current and (best is None or (s, n_edits, text) < best[:3]):
                best = (s, n_edits, text, payload)
            if s == 0:
                break
        return best

    def greedy(self, clean: Fraction) -> tuple[str, Fraction]:
        cfg = self.config
        projection = self.target.template.projection
        tokens = tokenize(self.body, projection)
        by_index = {t.index: t for t in tokens}
        ranking = _rank(self.scorer, self.body, tokens, clean)
        cap = cfg.word_cap(len(tokens))
        label_words = {w.lower() for w in projection.values()}
        forms: dict[int, str] = {}
        current, text = clean, self.body
        touched = 0
        rounds = cfg.max_char_edits_per_word if cfg.level == "character" else 1
        for index, _importance in ranking:
            if touched >= cap or current == 0 or not self.scorer.can_score():
                break
            tok = by_index[index]
            changed = False
            for rnd in range(rounds):
                word = forms.get(index, tok.text)
                if cfg.level == "character":
                    options = single_edits(word, cfg.seed)
                    rng = random.Random(f"{cfg.seed}\x00{index}\x00{rnd}")
                    if len(options) > cfg.max_candidates:
                        options = sorted(rng.sample(options, cfg.max_candidates))
                else:
                    options = [_match_case(c, tok.text) for c in word_candidates(cfg.candidate_provider, tok.text)]
                options = [o for o in options if o.lower() not in label_words and o != word and "{" not in o and "}" not in o]
                candidates = [(assemble(self.body, tokens, {**forms, index: o}), 1, o) for o in options]
                best = self.pick(candidates, current)
                if best is None:
                    break
                current, text, new_word = best[0], best[2], best[3]
                self.log.append(Edit(tok.start, word, new_word, index))
                forms[index] = new_word
                changed = True
                if current == 0 or not self.scorer.can_score():
                    break
            touched += changed
        return text, current

    def sentence(self, clean: Fraction) -> tuple[str, Fraction]:
        projection = self.target.template.projection
        # a distractor that spells a label word would add answer vocabulary to the prompt
        usable = [d for d in distractor_table() if not projection_spans(d, projection)]
        candidates = [(self.body + " " + d, 1, d) for d in usable]
        best = self.pick(candidates, clean)
        if best is None:
            return self.body, clean
        self.log.append(Edit(len(self.body), "", " " + best[3]))
        return best[2], best[0]

    def semantic(self, clean: Fraction) -> tuple[str, Fraction]:
        table = style_table()
        tid = self.target.template.id
        if tid not in table:
            raise ConfigError(f"no semantic style table for template {tid!r}")
        instruction, rest = split_instruction(self.body)
        projection = self.target.template.projection
        # a rewrite must carry every label word of the instruction, in order, unchanged
        words = label_word_sequence(instruction, projection)
        candidates = [(variant + rest, 1, variant) for _region, variant in sorted(table[tid].items())
                      if label_word_sequence(variant, projection) == words]
        best = self.pick(candidates, clean)
        if best is None:
            return self.body, clean
        self.log.append(Edit(0, instruction, best[3]))
        return best[2], best[0]


def attack(target: AttackTarget, config: AttackConfig, endpoint, eval_subset: Sequence[DataRecord],
           params: Optional[GenerationParams] = None, parallelism: int = 1) -> AttackResult:
    if config.query_budget < 1:
        raise BudgetTooSmall(f"query_budget {config.query_budget} cannot even score the clean prompt")
    records = list(eval_subset)[: config.eval_subset_size]
    if len(records) < config.eval_subset_size:
        raise ConfigError(f"eval_subset_size {config.eval_subset_size} exceeds the {len(records)} records given")
    model = as_model(endpoint)
    scorer = Scorer(target, model, params or GenerationParams(), records, config.query_budget, parallelism)
    search = _Search(target, config, scorer)
    body = target.template.body
    if config.level in ("character", "word"):
        if not any(not t.protected for t in tokenize(body, target.template.projection)):
            raise NoAttackableWords(f"{target.template.id}: every word of the prompt is protected")
    clean = scorer(body)
    if config.level in ("character", "word"):
        perturbed, attacked = search.greedy(clean)
    elif config.level == "sentence":
        perturbed, attacked = search.sentence(clean)
    else:
        perturbed, attacked = search.semantic(clean)
    return AttackResult(
        original_prompt=body,
        perturbed_prompt=perturbed,
        level=config.level,
        queries_used=scorer.queries_used,
        clean_score=float(clean),
        attacked_score=float(attacked),
        drop_rate=drop_rate(float(clean), float(attacked)),
        perturbation_log=search.log,
        template_id=target.template.id,
        dataset=target.dataset or target.template.dataset,
        endpoint=getattr(endpoint, "label", type(model).__name__),
        config=config.to_json(),
    )

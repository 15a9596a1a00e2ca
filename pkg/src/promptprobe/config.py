"""YAML run configuration shared by the CLI commands.

Example::

    seed: 0
    parallelism: 2
    out: runs
    endpoints:
      - {name: oracle, kind: mock, mock_rulebook: "oracle:sst2"}
    datasets: [sst2]
    templates: default          # or all, task, role, zs, fs, a list of ids, or a per-dataset mapping
    methods: [none, zs_cot]
    attacks:
      - none
      - {level: word, query_budget: 20, eval_subset_size: 8}

Validation is all-or-nothing: ``load_config`` either returns a plan whose
every name resolves or raises ``ConfigError`` naming the first offender.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .attacks import AttackConfig
from .datasets import register_dataset_dir
from .errors import ConfigError, PromptProbeError
from .models import GenerationParams, ModelEndpoint, RetryPolicy, load_rulebooks
from .pipeline import Cell, build_plan, validate_plan
from .prompts import builtin_templates

TOP_KEYS = {
    "seed", "parallelism", "out", "eval_limit", "endpoints", "datasets", "dataset_paths",
    "templates", "methods", "attacks", "params", "rulebooks",
}
SELECTORS = {
    "default": lambda ts: ts[:1],
    "all": lambda ts: ts,
    "task": lambda ts: [t for t in ts if t.orientation == "task_oriented"],
    "role": lambda ts: [t for t in ts if t.orientation == "role_oriented"],
    "zs": lambda ts: [t for t in ts if t.shots == 0],
    "fs": lambda ts: [t for t in ts if t.shots > 0],
}


@dataclass
class RunConfig:
    endpoints: list
    datasets: list
    templates: dict
    methods: list = field(default_factory=lambda: ["none"])
    attacks: list = field(default_factory=lambda: [None])
    params: GenerationParams = field(default_factory=GenerationParams)
    seed: int = 0
    parallelism: int = 1
    out: str = "runs"
    eval_limit: Optional[int] = None

    def plan(self) -> list[Cell]:
        return build_plan(self.endpoints, self.datasets, self.templates, self.methods, self.attacks,
                          self.params, self.seed, self.eval_limit)


def _endpoint(doc) -> ModelEndpoint:
    if not isinstance(doc, dict):
        raise ConfigError(f"endpoint entries must be mappings, got {doc!r}")
    doc = dict(doc)
    retry = doc.pop("retry", None)
    try:
        if retry is not None:
            doc["retry"] = RetryPolicy(**retry)
        return ModelEndpoint(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad endpoint {doc.get('name', doc)!r}: {exc}") from None


def _attack(doc, seed: int) -> Optional[AttackConfig]:
    if doc in (None, "none"):
        return None
    if isinstance(doc, str):
        doc = {"level": doc}
    try:
        return AttackConfig(**{"seed": seed, **doc})
    except TypeError as exc:
        raise ConfigError(f"bad attack config {doc!r}: {exc}") from None


def _templates(selector, dataset: str) -> list[str]:
    if isinstance(selector, dict):
        if dataset not in selector:
            return _templates("default", dataset)
        selector = selector[dataset]
    available = builtin_templates(dataset)
    if isinstance(selector, str):
        if selector not in SELECTORS:
            ids = [t.id for t in available]
            if selector in ids:
                return [selector]
            raise ConfigError(f"unknown template selector {selector!r} for {dataset}")
        chosen = SELECTORS[selector](available)
        if not chosen:
            raise ConfigError(f"template selector {selector!r} matches nothing for {dataset}")
        return [t.id for t in chosen]
    ids = {t.id for t in available}
    return [tid for tid in selector if tid in ids]


def parse_config(doc: dict, base_dir: Path = Path("."), overrides: Optional[dict] = None) -> RunConfig:
    doc = dict(doc or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for name, path in (doc.get("dataset_paths") or {}).items():
        path = Path(path)
        register_dataset_dir(name, path if path.is_absolute() else base_dir / path)
    if not doc.get("endpoints"):
        raise ConfigError("config needs at least one endpoint")
    if not doc.get("datasets"):
        raise ConfigError("config needs at least one dataset")
    seed = int(doc.get("seed", 0))
    try:
        params = GenerationParams(**(doc.get("params") or {}))
    except TypeError as exc:
        raise ConfigError(f"bad params: {exc}") from None
    selector = doc.get("templates", "default")
    datasets = list(doc["datasets"])
    try:
        templates = {ds: _templates(selector, ds) for ds in datasets}
    except PromptProbeError as exc:
        raise ConfigError(str(exc)) from None
    if isinstance(selector, list):
        known = {tid for ids in templates.values() for tid in ids}
        missing = [tid for tid in selector if tid not in known]
        if missing:
            raise ConfigError(f"unknown template ids: {', '.join(missing)}")
    empty = [ds for ds, ids in templates.items() if not ids]
    if empty:
        raise ConfigError(f"no templates selected for {', '.join(empty)}")
    cfg = RunConfig(
        endpoints=[_endpoint(e) for e in doc["endpoints"]],
        datasets=datasets,
        templates=templates,
        methods=list(doc.get("methods") or ["none"]),
        attacks=[_attack(a, seed) for a in (doc.get("attacks") or ["none"])],
        params=params,
        seed=seed,
        parallelism=int(doc.get("parallelism", 1)),
        out=str(doc.get("out", "runs")),
        eval_limit=doc.get("eval_limit"),
    )
    if cfg.parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    try:
        validate_plan(cfg.plan())
    except ConfigError:
        raise
    except PromptProbeError as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from None
    return cfg


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    if doc.get("rulebooks"):
        try:
            load_rulebooks(path)
        except PromptProbeError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad rulebooks in {path}: {exc}") from None
    return parse_config(doc, path.parent, overrides)


def with_attacks_only(cfg: RunConfig) -> RunConfig:
    attacks = [a for a in cfg.attacks if a is not None]
    if not attacks:
        raise ConfigError("config lists no attacks")
    return replace(cfg, attacks=attacks, methods=["none"])

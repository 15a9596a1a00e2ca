"""Sweep orchestration: render, query, parse and score each cell of a plan."""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from itertools import product
from pathlib import Path
from typing import Mapping, Optional, Sequence

from ..datasets import load_dataset, load_fewshot_pool, sample_few_shot
from ..engineering import apply_method, get_method
from ..errors import ConfigError
from ..models import GenerationParams, ModelEndpoint, as_model, batch_generate, resolve_rulebook
from ..prompts import get_template, render
from .parsing import extract_freeform, normalize_freeform, process_output
from .records import RunRecord, RunWriter, SampleResult, compute_metrics

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cell:
    endpoint: ModelEndpoint
    dataset: str
    template_id: str
    method: str = "none"
    attack: Optional[object] = None  # AttackConfig
    params: GenerationParams = field(default_factory=GenerationParams)
    seed: int = 0
    limit: Optional[int] = None

    @property
    def attack_label(self) -> str:
        if self.attack is None:
            return "none"
        a = self.attack
        return f"{a.level}-b{a.query_budget}-s{a.seed}"

    @property
    def cell_id(self) -> str:
        return "|".join([self.endpoint.label, self.dataset, self.template_id, self.method, self.attack_label])

    def key(self) -> dict:
        return {
            "endpoint": self.endpoint.describe(),
            "dataset": self.dataset,
            "template_id": self.template_id,
            "method": self.method,
            "attack": self.attack.to_json() if self.attack else "none",
            "params": _params_json(self.params),
            "seed": self.seed,
            "limit": self.limit,
        }


def _params_json(params: GenerationParams) -> dict:
    return {"temperature": params.temperature, "max_new_tokens": params.max_new_tokens, "seed": params.seed}


def build_plan(endpoints: Sequence[ModelEndpoint], datasets: Sequence[str], templates: Mapping[str, Sequence[str]],
               methods: Sequence[str] = ("none",), attacks: Sequence = (None,),
               params: Optional[GenerationParams] = None, seed: int = 0, limit: Optional[int] = None) -> list[Cell]:
    """Cross product of the plan axes; ``templates`` maps each dataset to its template ids."""
    params = params or GenerationParams()
    cells = []
    for ep, ds in product(endpoints, datasets):
        for tid, method, atk in product(templates[ds], methods, attacks):
            cells.append(Cell(ep, ds, tid, method, atk, params, seed, limit))
    return cells


def plan_run_id(cells: Sequence[Cell]) -> str:
    blob = json.dumps([c.key() for c in cells], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def validate_plan(cells: Sequence[Cell]) -> None:
    """Resolve every name a plan references; raises on the first unknown one."""
    from ..attacks import style_table

    for c in cells:
        load_dataset(c.dataset)
        get_template(c.dataset, c.template_id)
        if c.method != "none":
            get_method(c.method)
        if c.endpoint.kind == "mock":
            resolve_rulebook(c.endpoint.mock_rulebook)
        if c.attack is not None and c.attack.level == "semantic" and c.template_id not in style_table():
            raise ConfigError(f"no semantic style table for template {c.template_id!r}")
    ids = [c.cell_id for c in cells]
    if len(set(ids)) != len(ids):
        raise ConfigError("plan contains duplicate cells")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _judge(raw: str, gold: str, meta, projection) -> tuple[str, bool]:
    if meta.is_freeform:
        pred = extract_freeform(raw)
        return pred, pred == normalize_freeform(gold)
    pred = process_output(raw, meta.label_space, projection)
    return pred, pred == gold


def execute_cell(cell: Cell, run_id: str, parallelism: int = 1):
    """Run one cell; returns ``(RunRecord, AttackResult or None)``. Errors propagate."""
    from ..attacks import AttackTarget, attack

    started = _now()
    meta, records = load_dataset(cell.dataset)
    if cell.limit is not None:
        records = records[: cell.limit]
    template = get_template(cell.dataset, cell.template_id).validate(meta)
    pool = load_fewshot_pool(cell.dataset)
    if pool:
        shots = sample_few_shot(pool, template.shots, cell.seed)
    else:
        # no separate pool: draw from the data and keep the drawn records out of scoring
        shots = sample_few_shot(records, template.shots, cell.seed)
        drawn = {s.id for s in shots}
        records = [r for r in records if r.id not in drawn]
    model = as_model(cell.endpoint)

    attack_result = None
    if cell.attack is not None:
        target = AttackTarget(template, tuple(meta.label_space), tuple(shots), meta.is_freeform, cell.dataset)
        attack_result = attack(target, cell.attack, model, records, cell.params, parallelism)
        attack_result.endpoint = cell.endpoint.label
        template = template.with_body(attack_result.perturbed_prompt)

    prompts = [render(template, rec, shots).text for rec in records]
    if cell.method == "none":
        items = batch_generate(model, cell.params, prompts, parallelism)
        for item in items:
            if not item.ok:
                raise item.error
        raws = [item.text for item in items]
    else:
        method = get_method(cell.method)
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool_ex:
            outcomes = list(pool_ex.map(lambda p: apply_method(method, p, model, cell.params), prompts))
        raws = [o.answer for o in outcomes]

    per_sample = []
    for rec, prompt, raw in zip(records, prompts, raws):
        pred, correct = _judge(raw, rec.label, meta, template.projection)
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        per_sample.append(SampleResult(rec.id, digest, raw, pred, rec.label, correct))

    summary = None
    if attack_result is not None:
        summary = {
            "level": attack_result.level,
            "clean_score": attack_result.clean_score,
            "attacked_score": attack_result.attacked_score,
            "drop_rate": attack_result.drop_rate,
            "queries_used": attack_result.queries_used,
            "perturbed_prompt": attack_result.perturbed_prompt,
        }
    record = RunRecord(
        run_id=run_id,
        cell_id=cell.cell_id,
        endpoint=cell.endpoint.describe(),
        dataset=cell.dataset,
        template_id=cell.template_id,
        label_space=list(meta.label_space),
        method=cell.method,
        attack=cell.attack.to_json() if cell.attack else "none",
        attack_summary=summary,
        per_sample=per_sample,
        metrics=compute_metrics(per_sample, meta.is_freeform, meta.label_space),
        few_shot_ids=[s.id for s in shots],
        seeds=_seeds(cell),
        params=_params_json(cell.params),
        timestamps={"started": started, "finished": _now()},
    )
    return record, attack_result


def _seeds(cell: Cell) -> dict:
    return {
        "plan": cell.seed,
        "few_shot": cell.seed,
        "attack": cell.attack.seed if cell.attack else None,
        "generation": cell.params.seed,
    }


def run_cell(cell: Cell, run_id: str, parallelism: int = 1):
    """Like ``execute_cell`` but failures become an error record instead of raising."""
    started = _now()
    try:
        return execute_cell(cell, run_id, parallelism)
    except Exception as exc:  # a failing cell must not abort the sweep
        log.warning("cell %s failed: %s: %s", cell.cell_id, type(exc).__name__, exc)
        meta_labels: list = []
        try:
            meta_labels = list(load_dataset(cell.dataset)[0].label_space)
        except Exception:
            pass
        record = RunRecord(
            run_id=run_id,
            cell_id=cell.cell_id,
            endpoint=cell.endpoint.describe(),
            dataset=cell.dataset,
            template_id=cell.template_id,
            label_space=meta_labels,
            method=cell.method,
            attack=cell.attack.to_json() if cell.attack else "none",
            seeds=_seeds(cell),
            params=_params_json(cell.params),
            timestamps={"started": started, "finished": _now()},
            status="error",
            error=f"{type(exc).__name__}: {exc}",
        )
        return record, None


def run_sweep(cells: Sequence[Cell], out_dir=None, parallelism: int = 1, run_id: Optional[str] = None,
              validate: bool = True) -> list[RunRecord]:
    """Execute ``cells`` and return their records in plan order.

    Cells run concurrently up to ``parallelism``; records are written to
    ``<out_dir>/<run_id>.jsonl`` in plan order by this thread alone, each one
    as soon as it and all earlier cells are done.
    """
    if validate:
        validate_plan(cells)
    run_id = run_id or plan_run_id(cells)
    writer = RunWriter(Path(out_dir) / f"{run_id}.jsonl") if out_dir is not None else None
    results = []
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as ex:
        futures = [ex.submit(run_cell, c, run_id, parallelism) for c in cells]
        for cell, fut in zip(cells, futures):
            record, attack_result = fut.result()
            if writer is not None:
                if attack_result is not None:
                    doc = attack_result.to_json()
                    doc.update(run_id=run_id, cell_id=cell.cell_id)
                    writer.append(doc)
                writer.append(record.to_json())
            results.append(record)
    return results


def run_file(out_dir, run_id: str) -> Path:
    return Path(out_dir) / f"{run_id}.jsonl"


__all__ = [
    "Cell",
    "build_plan",
    "execute_cell",
    "plan_run_id",
    "run_cell",
    "run_file",
    "run_sweep",
    "validate_plan",
]

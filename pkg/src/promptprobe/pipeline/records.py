"""Run records: construction, schema validation and append-only persistence."""
from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import jsonschema

from ..errors import SchemaViolation
from .metrics import score

CLASSIFICATION_METRICS = ("accuracy", "macro_f1")
FREEFORM_METRICS = ("exact_match", "accuracy")


@dataclass(frozen=True)
class SampleResult:
    id: str
    prompt_sha256: str
    raw_output: str
    prediction: str
    gold: str
    correct: bool


@dataclass
class RunRecord:
    run_id: str
    cell_id: str
    endpoint: dict
    dataset: str
    template_id: str
    method: str = "none"
    attack: object = "none"
    attack_summary: Optional[dict] = None
    per_sample: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    few_shot_ids: list = field(default_factory=list)
    seeds: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)
    status: str = "ok"
    error: Optional[str] = None
    label_space: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["per_sample"] = [asdict(s) if isinstance(s, SampleResult) else dict(s) for s in self.per_sample]
        doc["kind"] = "run_record"
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "RunRecord":
        doc = {k: v for k, v in doc.items() if k != "kind"}
        doc["per_sample"] = [SampleResult(**s) for s in doc.get("per_sample", [])]
        return cls(**doc)


def metric_names(freeform: bool) -> tuple:
    return FREEFORM_METRICS if freeform else CLASSIFICATION_METRICS


def compute_metrics(per_sample, freeform: bool, label_space: Sequence[str] = ()) -> dict:
    return {m: score(per_sample, m, label_space or None) for m in metric_names(freeform)}


def recompute_metrics(record: RunRecord, label_space: Sequence[str] = ()) -> dict:
    """Re-derive stored metrics from ``per_sample``; the metric set tells the task kind."""
    freeform = "exact_match" in record.metrics
    return compute_metrics(record.per_sample, freeform, label_space or record.label_space)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    res = resources.files("promptprobe") / "data" / "schemas" / f"{name}.schema.json"
    return json.loads(res.read_text())


def validate_line(doc: dict) -> None:
    kind = doc.get("kind")
    if kind not in ("run_record", "attack_result"):
        raise SchemaViolation(f"unknown line kind {kind!r}")
    try:
        jsonschema.validate(doc, load_schema(kind))
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(f"{kind}: {exc.message}", doc.get("cell_id")) from None


class RunWriter:
    """Append-only JSONL writer; every line is flushed and fsynced before returning."""

    def __init__(self, path, truncate: bool = True):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        if truncate:
            self.path.write_text("")

    def append(self, doc: dict) -> None:
        validate_line(doc)
        line = json.dumps(doc, sort_keys=True, ensure_ascii=False) + "\n"
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())


def read_run_file(path) -> list[dict]:
    """All lines of a run file, schema-checked."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"{path}:{n}: {exc}") from None
            validate_line(doc)
            docs.append(doc)
    return docs


def read_run_dir(path) -> list[dict]:
    docs = []
    for f in sorted(Path(path).glob("*.jsonl")):
        docs.extend(read_run_file(f))
    return docs

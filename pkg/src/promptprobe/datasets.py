"""JSONL task fixtures behind a name -> loader registry.

On disk a dataset is a directory holding ``meta.json`` (the DatasetMeta
fields), ``data.jsonl`` (one ``{"id", "fields", "label"}`` object per line)
and optionally ``fewshot.jsonl``, a separate pool for few-shot exemplars.
"""
from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .errors import InsufficientRecords, SchemaViolation, UnknownDataset

TASK_KINDS = ("classification", "nli", "paraphrase", "reasoning_freeform")


@dataclass(frozen=True)
class DatasetMeta:
    name: str
    task_kind: str
    label_space: tuple
    field_names: tuple

    def __post_init__(self):
        if self.task_kind not in TASK_KINDS:
            raise SchemaViolation(f"{self.name}: unknown task_kind {self.task_kind!r}")
        if self.task_kind != "reasoning_freeform" and not self.label_space:
            raise SchemaViolation(f"{self.name}: {self.task_kind} needs a non-empty label_space")
        if not self.field_names or len(set(self.field_names)) != len(self.field_names):
            raise SchemaViolation(f"{self.name}: field_names must be non-empty and distinct")

    @property
    def is_freeform(self) -> bool:
        return self.task_kind == "reasoning_freeform"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "task_kind": self.task_kind,
            "label_space": list(self.label_space),
            "field_names": list(self.field_names),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DatasetMeta":
        return cls(doc["name"], doc["task_kind"], tuple(doc.get("label_space", ())), tuple(doc["field_names"]))


@dataclass(frozen=True, eq=True)
class DataRecord:
    id: str
    fields: dict
    label: str

    def __hash__(self):
        return hash((self.id, tuple(sorted(self.fields.items())), self.label))

    def to_json(self) -> dict:
        return {"id": self.id, "fields": dict(self.fields), "label": self.label}

    @classmethod
    def from_json(cls, doc: dict) -> "DataRecord":
        return cls(str(doc["id"]), dict(doc["fields"]), str(doc["label"]))


def validate_records(meta: DatasetMeta, records) -> list[DataRecord]:
    seen = set()
    expected = set(meta.field_names)
    for rec in records:
        if rec.id in seen:
            raise SchemaViolation("duplicate id", rec.id)
        seen.add(rec.id)
        if set(rec.fields) != expected:
            raise SchemaViolation(f"fields {sorted(rec.fields)} != {sorted(expected)}", rec.id)
        if not all(isinstance(v, str) for v in rec.fields.values()):
            raise SchemaViolation("field values must be strings", rec.id)
        if meta.label_space and rec.label not in meta.label_space:
            raise SchemaViolation(f"label {rec.label!r} not in {list(meta.label_space)}", rec.id)
    return list(records)


def read_jsonl(path) -> list[DataRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(DataRecord.from_json(json.loads(line)))
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise SchemaViolation(f"{path}:{lineno}: malformed record ({exc})") from None
    return out


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def write_dataset_dir(path, meta: DatasetMeta, records, fewshot=None) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "meta.json").write_text(json.dumps(meta.to_json(), indent=2) + "\n")
    write_jsonl(path / "data.jsonl", records)
    if fewshot is not None:
        write_jsonl(path / "fewshot.jsonl", fewshot)
    return path


@dataclass(frozen=True)
class DirectoryLoader:
    path: Path

    def __call__(self):
        meta = DatasetMeta.from_json(json.loads((self.path / "meta.json").read_text()))
        records = validate_records(meta, read_jsonl(self.path / "data.jsonl"))
        return meta, records

    def fewshot(self) -> Optional[list[DataRecord]]:
        pool = self.path / "fewshot.jsonl"
        if not pool.exists():
            return None
        meta, _ = self()
        return validate_records(meta, read_jsonl(pool))


Loader = Callable[[], tuple]

_registry: dict[str, Loader] = {}
_cache: dict[str, tuple] = {}
_lock = threading.Lock()


def builtin_root() -> Path:
    return Path(str(resources.files("promptprobe") / "data" / "datasets"))


def _register_builtins():
    root = builtin_root()
    for sub in sorted(root.iterdir()):
        if (sub / "meta.json").exists():
            _registry.setdefault(sub.name, DirectoryLoader(sub))


def register_dataset(name: str, loader: Loader) -> None:
    """Add or replace a dataset; ``loader()`` returns ``(meta, records)``."""
    with _lock:
        _registry[name] = loader
        _cache.pop(name, None)


def register_dataset_dir(name: str, path) -> None:
    register_dataset(name, DirectoryLoader(Path(path)))


def dataset_names() -> list[str]:
    return sorted(_registry)


def load_dataset(name: str) -> tuple[DatasetMeta, list[DataRecord]]:
    with _lock:
        if name in _cache:
            meta, records = _cache[name]
            return meta, list(records)
        loader = _registry.get(name)
    if loader is None:
        raise UnknownDataset(f"dataset {name!r} is not registered (known: {', '.join(dataset_names())})")
    meta, records = loader()
    records = validate_records(meta, records)
    with _lock:
        _cache[name] = (meta, tuple(records))
    return meta, list(records)


def load_fewshot_pool(name: str) -> Optional[list[DataRecord]]:
    if name not in _registry:
        raise UnknownDataset(f"dataset {name!r} is not registered")
    loader = _registry[name]
    return loader.fewshot() if hasattr(loader, "fewshot") else None


def sample_few_shot(records, k: int, seed: int) -> list[DataRecord]:
    if k < 0:
        raise InsufficientRecords("k must be non-negative")
    if k > len(records):
        raise InsufficientRecords(f"asked for {k} shots from {len(records)} records")
    return random.Random(seed).sample(list(records), k)


_register_builtins()

"""Prompt templates: the four task/role x zero/few-shot types and rendering.

A template body mixes instruction text with placeholders. ``{content}`` is the
query record laid out with ``fewshot_item_format`` cut just before
``{answer}`` (so it ends in ``Answer:``), ``{examples}`` is the newline-joined
block of few-shot exemplars, and ``{<field>}`` drops a raw field value in.
"""
from __future__ import annotations

import json
import re
from functools import lru_cache
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .datasets import DataRecord, DatasetMeta, load_dataset
from .errors import MissingField, ShotMismatch, TemplateError, UnknownDataset

PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
RESERVED = ("content", "examples")
ORIENTATIONS = ("task_oriented", "role_oriented")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    orientation: str
    shots: int
    body: str
    projection: dict = field(default_factory=dict)
    fewshot_item_format: str = ""
    dataset: str = ""

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise TemplateError(f"{self.id}: orientation must be one of {ORIENTATIONS}")
        if self.shots < 0:
            raise TemplateError(f"{self.id}: shots must be >= 0")
        surfaces = list(self.projection.values())
        if len(set(surfaces)) != len(surfaces):
            raise TemplateError(f"{self.id}: projection is not injective")
        names = self.placeholders()
        if self.shots and "examples" not in names:
            raise TemplateError(f"{self.id}: few-shot template lacks {{examples}}")
        if ("content" in names or "examples" in names) and "{answer}" not in self.fewshot_item_format:
            raise TemplateError(f"{self.id}: fewshot_item_format needs an {{answer}} slot")

    def __hash__(self):
        return hash((self.id, self.body, self.shots))

    def placeholders(self) -> list[str]:
        return PLACEHOLDER.findall(self.body)

    @property
    def query_format(self) -> str:
        return self.fewshot_item_format.split("{answer}", 1)[0].rstrip()

    def validate(self, meta: DatasetMeta) -> "PromptTemplate":
        allowed = set(meta.field_names) | set(RESERVED)
        for name in self.placeholders():
            if name not in allowed:
                raise TemplateError(f"{self.id}: unknown placeholder {{{name}}}")
        for name in PLACEHOLDER.findall(self.fewshot_item_format):
            if name != "answer" and name not in meta.field_names:
                raise TemplateError(f"{self.id}: unknown placeholder {{{name}}} in fewshot_item_format")
        if meta.label_space and set(self.projection) != set(meta.label_space):
            raise TemplateError(f"{self.id}: projection keys must equal the label space")
        return self

    def with_body(self, body: str) -> "PromptTemplate":
        return replace(self, body=body)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "dataset": self.dataset,
            "orientation": self.orientation,
            "shots": self.shots,
            "body": self.body,
            "projection": dict(self.projection),
            "fewshot_item_format": self.fewshot_item_format,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PromptTemplate":
        return cls(
            id=doc["id"],
            orientation=doc["orientation"],
            shots=int(doc["shots"]),
            body=doc["body"],
            projection=dict(doc.get("projection", {})),
            fewshot_item_format=doc.get("fewshot_item_format", ""),
            dataset=doc.get("dataset", ""),
        )


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    template_id: str
    record_id: str
    protected_spans: tuple
    # unmerged spans of substituted field values, in text order
    field_spans: tuple = ()

    def protected_text(self) -> list[str]:
        return [self.text[a:b] for a, b in self.protected_spans]


@lru_cache(maxsize=1024)
def word_pattern(word: str) -> re.Pattern:
    return re.compile(r"(?<!\w)" + re.escape(word) + r"(?!\w)", re.IGNORECASE)


def projection_spans(text: str, projection: dict) -> list[tuple[int, int]]:
    spans = []
    for surface in set(projection.values()):
        spans.extend(m.span() for m in word_pattern(surface).finditer(text))
    return sorted(spans)


def merge_spans(spans) -> tuple:
    merged: list[list[int]] = []
    for a, b in sorted(spans):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


class _Builder:
    def __init__(self):
        self.parts: list[str] = []
        self.size = 0
        self.spans: list[tuple[int, int]] = []

    def text(self, s: str):
        self.parts.append(s)
        self.size += len(s)

    def value(self, s: str):
        if s:
            self.spans.append((self.size, self.size + len(s)))
        self.text(s)

    def fill(self, fmt: str, record: DataRecord, extra: Optional[dict] = None):
        pos = 0
        for m in PLACEHOLDER.finditer(fmt):
            self.text(fmt[pos : m.start()])
            name = m.group(1)
            if extra and name in extra:
                self.text(extra[name])
            elif name in record.fields:
                self.value(record.fields[name])
            else:
                raise MissingField(f"record {record.id!r} has no field {name!r}")
            pos = m.end()
        self.text(fmt[pos:])


def render(template: PromptTemplate, record: DataRecord, few_shot: Sequence[DataRecord] = ()) -> RenderedPrompt:
    if len(few_shot) != template.shots:
        raise ShotMismatch(f"{template.id} expects {template.shots} shots, got {len(few_shot)}")
    b = _Builder()
    pos = 0
    for m in PLACEHOLDER.finditer(template.body):
        b.text(template.body[pos : m.start()])
        name = m.group(1)
        if name == "examples":
            for i, shot in enumerate(few_shot):
                if i:
                    b.text("\n")
                answer = template.projection.get(shot.label, shot.label)
                b.fill(template.fewshot_item_format, shot, {"answer": answer})
        elif name == "content":
            b.fill(template.query_format, record)
        elif name in record.fields:
            b.value(record.fields[name])
        else:
            raise MissingField(f"record {record.id!r} has no field {name!r}")
        pos = m.end()
    b.text(template.body[pos:])
    text = "".join(b.parts)
    spans = merge_spans(b.spans + projection_spans(text, template.projection))
    return RenderedPrompt(text, template.id, record.id, spans, tuple(b.spans))


_registered: dict[str, list[PromptTemplate]] = {}


def register_templates(dataset: str, templates: Sequence[PromptTemplate]) -> None:
    _registered[dataset] = list(templates)


def load_template_file(path) -> list[PromptTemplate]:
    return [PromptTemplate.from_json(d) for d in json.loads(Path(path).read_text())]


def generic_templates(meta: DatasetMeta) -> list[PromptTemplate]:
    """Fallback set for datasets registered without a prompts file."""
    item = " ".join(f"{f.replace('_', ' ').capitalize()}: {{{f}}}" for f in meta.field_names) + " Answer: {answer}"
    if meta.label_space:
        choices = " or ".join(f"'{label}'" for label in meta.label_space)
        task = f"Read the input below and respond with {choices}."
        role = f"As an expert annotator, label the input below by responding with {choices}."
    else:
        task = "Solve the problem below and give the final answer after 'Answer:'."
        role = "As a careful problem solver, work through the problem below and give the final answer after 'Answer:'."
    projection = {label: label for label in meta.label_space}
    out = []
    for orient, text in (("task_oriented", task), ("role_oriented", role)):
        for shots in (0, 3):
            body = text + (" Here are three examples.\n{examples}\n{content}" if shots else "\n{content}")
            tid = f"{meta.name}-{orient.split('_')[0]}-{'fs' if shots else 'zs'}"
            out.append(PromptTemplate(tid, orient, shots, body, projection, item, meta.name))
    return out


def builtin_templates(dataset_name: str) -> list[PromptTemplate]:
    meta, _ = load_dataset(dataset_name)  # raises UnknownDataset
    if dataset_name in _registered:
        templates = _registered[dataset_name]
    else:
        res = resources.files("promptprobe") / "data" / "prompts" / f"{dataset_name}.json"
        if res.is_file():
            templates = [PromptTemplate.from_json(d) for d in json.loads(res.read_text())]
        else:
            templates = generic_templates(meta)
    return [t.validate(meta) for t in templates]


def get_template(dataset_name: str, template_id: str) -> PromptTemplate:
    for t in builtin_templates(dataset_name):
        if t.id == template_id:
            return t
    raise TemplateError(f"no template {template_id!r} for dataset {dataset_name!r}")


def dataset_projection(dataset_name: str) -> dict:
    templates = builtin_templates(dataset_name)
    if not templates:
        raise UnknownDataset(f"no templates for {dataset_name!r}")
    return dict(templates[0].projection)

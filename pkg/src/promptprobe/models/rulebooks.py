"""Named mock rulebooks.

Besides explicitly registered rulebooks, a few parametric names are built on
demand::

    echo                         respond with the prompt itself
    constant:<text>              always respond <text>
    oracle:<dataset>[;opt...]    answer each evaluation record with its gold
                                 label (projected to the surface word)

Options for ``oracle``: ``keyword=<word>`` answers wrongly whenever <word> is
missing from the prompt, ``tail`` answers wrongly unless the prompt ends with
``Answer:``, ``noise=<p>`` flips answers with probability p, ``seed=<n>`` sets
the noise seed.
"""
from __future__ import annotations

import re
import threading
from pathlib import Path

import yaml

from ..errors import ConfigError, UnknownRulebook
from .mock import MockRulebook, Noise, Rule

FAILURE_RESPONSE = "I am not sure."

_registry: dict[str, MockRulebook] = {}
_lock = threading.Lock()


def register_rulebook(name: str, rulebook: MockRulebook) -> None:
    with _lock:
        _registry[name] = rulebook


def rulebook_from_dict(spec: dict) -> MockRulebook:
    return MockRulebook.build(
        rules=spec.get("rules", ()),
        fallback=spec.get("fallback", "unknown"),
        noise=spec.get("noise"),
        seed=int(spec.get("seed", 0)),
    )


def load_rulebooks(path) -> dict[str, MockRulebook]:
    """Read a ``rulebooks:`` mapping from a YAML config file and register it."""
    doc = yaml.safe_load(Path(path).read_text()) or {}
    books = {name: rulebook_from_dict(spec) for name, spec in (doc.get("rulebooks") or {}).items()}
    for name, book in books.items():
        register_rulebook(name, book)
    return books


def _absent(word: str) -> str:
    return r"\A(?![\s\S]*\b" + re.escape(word) + r"\b)"


def oracle_rules(dataset: str) -> list[Rule]:
    from ..datasets import load_dataset
    from ..prompts import dataset_projection

    meta, records = load_dataset(dataset)
    projection = dataset_projection(dataset)
    keyed = []
    for rec in records:
        values = [rec.fields[name] for name in meta.field_names]
        pattern = r".*?".join(re.escape(v) for v in values)
        answer = projection.get(rec.label, rec.label)
        keyed.append((sum(len(v) for v in values), pattern, answer.replace("\\", "\\\\")))
    # longest content first so a record whose text contains another's wins
    keyed.sort(key=lambda k: -k[0])
    return [Rule(p, a) for _, p, a in keyed]


def build_oracle(name: str) -> MockRulebook:
    head, *opts = name.split(";")
    dataset = head.split(":", 1)[1]
    pre: list[Rule] = []
    noise = None
    seed = 0
    for opt in opts:
        key, _, value = opt.partition("=")
        if key == "keyword":
            pre.append(Rule(_absent(value), FAILURE_RESPONSE))
        elif key == "tail":
            pre.append(Rule(r"\A(?![\s\S]*Answer:\Z)", FAILURE_RESPONSE))
        elif key == "noise":
            noise = float(value)
        elif key == "seed":
            seed = int(value)
        else:
            raise UnknownRulebook(f"unknown oracle option {key!r} in {name!r}")
    if noise is not None:
        from ..prompts import dataset_projection

        labels = tuple(dict.fromkeys(dataset_projection(dataset).values()))
        if len(labels) < 2:
            raise ConfigError(f"noise needs a label space; {dataset!r} has none")
        noise = Noise(noise, labels)
    return MockRulebook(tuple(pre) + tuple(oracle_rules(dataset)), FAILURE_RESPONSE, noise, seed)


def resolve_rulebook(name: str) -> MockRulebook:
    with _lock:
        if name in _registry:
            return _registry[name]
    if name == "echo":
        book = MockRulebook.build([(r".*", r"\g<0>")])
    elif name.startswith("constant:"):
        book = MockRulebook.build([], fallback=name.split(":", 1)[1])
    elif name.startswith("oracle:"):
        try:
            book = build_oracle(name)
        except UnknownRulebook:
            raise
        except Exception as exc:
            raise UnknownRulebook(f"cannot build rulebook {name!r}: {exc}") from exc
    else:
        raise UnknownRulebook(f"no rulebook named {name!r}")
    register_rulebook(name, book)
    return book

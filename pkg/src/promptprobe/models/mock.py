"""Deterministic rule-table models for offline evaluation."""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import ConfigError
from .base import GenerationParams


@dataclass(frozen=True)
class Noise:
    flip_probability: float
    label_space: tuple

    def __post_init__(self):
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ConfigError("flip_probability must lie in [0, 1]")
        if len(self.label_space) < 2:
            raise ConfigError("noise label_space needs at least two labels")


@dataclass(frozen=True)
class Rule:
    pattern: str
    response: str
    compiled: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            object.__setattr__(self, "compiled", re.compile(self.pattern, re.DOTALL))
        except re.error as exc:
            raise ConfigError(f"bad rule pattern {self.pattern!r}: {exc}") from exc


@dataclass(frozen=True)
class MockRulebook:
    """Ordered (pattern -> response) rules with a fallback.

    Patterns are searched against the prompt; the first hit wins and its
    response is expanded with ``re.Match.expand`` so ``\\g<0>`` or ``\\1`` can
    echo captured text. Optional noise flips label-valued responses to another
    label, decided by a hash of (seed, prompt) so answers stay reproducible.
    """

    rules: tuple = ()
    fallback: str = "unknown"
    noise: Optional[Noise] = None
    seed: int = 0

    @classmethod
    def build(cls, rules: Sequence = (), fallback: str = "unknown", noise=None, seed: int = 0):
        parsed = []
        for r in rules:
            if isinstance(r, Rule):
                parsed.append(r)
            elif isinstance(r, dict):
                parsed.append(Rule(r["match"], r["response"]))
            else:
                pattern, response = r
                parsed.append(Rule(pattern, response))
        if isinstance(noise, dict):
            noise = Noise(float(noise["flip_probability"]), tuple(noise["label_space"]))
        return cls(tuple(parsed), fallback, noise, seed)

    def match(self, prompt: str) -> str:
        for rule in self.rules:
            m = rule.compiled.search(prompt)
            if m is not None:
                return m.expand(rule.response)
        return self.fallback

    def respond(self, prompt: str, seed: Optional[int] = None) -> str:
        out = self.match(prompt)
        if self.noise is None or out not in self.noise.label_space:
            return out
        seed = self.seed if seed is None else seed
        digest = hashlib.sha256(f"{seed}\x00{prompt}".encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        if rng.random() >= self.noise.flip_probability:
            return out
        others = [label for label in self.noise.label_space if label != out]
        return others[rng.randrange(len(others))]


class MockModel:
    def __init__(self, rulebook: MockRulebook):
        self.rulebook = rulebook

    def generate(self, prompt: str, params: GenerationParams) -> str:
        return self.rulebook.respond(prompt, params.seed)

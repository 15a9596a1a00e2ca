"""Unified text generation over mock rulebooks and chat-completions endpoints."""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from ..errors import ConfigError
from .base import BatchItem, GenerationParams, ModelEndpoint, RetryPolicy, TextModel
from .chat import ChatCompletionsModel
from .mock import MockModel, MockRulebook, Noise, Rule
from .rulebooks import load_rulebooks, register_rulebook, resolve_rulebook

__all__ = [
    "BatchItem",
    "ChatCompletionsModel",
    "GenerationParams",
    "MockModel",
    "MockRulebook",
    "ModelEndpoint",
    "Noise",
    "RetryPolicy",
    "Rule",
    "TextModel",
    "as_model",
    "batch_generate",
    "connect",
    "generate",
    "load_rulebooks",
    "register_rulebook",
    "resolve_rulebook",
]

_clients: dict[ModelEndpoint, ChatCompletionsModel] = {}
_clients_lock = threading.Lock()


def connect(endpoint: ModelEndpoint) -> TextModel:
    if endpoint.kind == "mock":
        return MockModel(resolve_rulebook(endpoint.mock_rulebook))
    with _clients_lock:
        model = _clients.get(endpoint)
        if model is None:
            model = _clients[endpoint] = ChatCompletionsModel(endpoint)
        return model


def as_model(target) -> TextModel:
    """Accept either an endpoint description or anything with ``generate``."""
    if isinstance(target, ModelEndpoint):
        return connect(target)
    if hasattr(target, "generate"):
        return target
    raise ConfigError(f"not a model or endpoint: {target!r}")


def generate(endpoint, params: GenerationParams, prompt: str) -> str:
    return as_model(endpoint).generate(prompt, params)


def batch_generate(endpoint, params: GenerationParams, prompts: Sequence[str], parallelism: int = 1) -> list[BatchItem]:
    """Generate for every prompt; failures land in their own slot.

    Output index i always corresponds to ``prompts[i]``.
    """
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    model = as_model(endpoint)

    def one(i: int, prompt: str) -> BatchItem:
        try:
            return BatchItem(i, text=model.generate(prompt, params))
        except Exception as exc:  # per-slot failure, the batch carries on
            return BatchItem(i, error=exc)

    if parallelism == 1 or len(prompts) <= 1:
        return [one(i, p) for i, p in enumerate(prompts)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, range(len(prompts)), prompts))

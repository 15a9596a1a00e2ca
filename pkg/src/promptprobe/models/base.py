from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

from ..errors import ConfigError


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_new_tokens: int = 256
    seed: Optional[int] = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_new_tokens < 1:
            raise ConfigError(f"max_new_tokens must be >= 1, got {self.max_new_tokens}")


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    base_delay: float = 1.0
    factor: float = 2.0

    def delay(self, retry_index: int) -> float:
        return self.base_delay * self.factor**retry_index


@dataclass(frozen=True)
class ModelEndpoint:
    """Where completions come from.

    ``auth_ref`` is the *name* of an environment variable; the key itself is
    read at request time and never stored on the endpoint.
    """

    kind: str
    model_name: str = ""
    base_url: Optional[str] = None
    auth_ref: Optional[str] = None
    mock_rulebook: Optional[str] = None
    name: Optional[str] = None
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    timeout: float = 30.0

    def __post_init__(self):
        if self.kind == "openai_compatible":
            if not self.base_url:
                raise ConfigError("openai_compatible endpoint needs base_url")
            if not self.auth_ref:
                raise ConfigError("openai_compatible endpoint needs auth_ref")
        elif self.kind == "mock":
            if not self.mock_rulebook:
                raise ConfigError("mock endpoint needs mock_rulebook")
        else:
            raise ConfigError(f"unknown endpoint kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "mock":
            return f"mock:{self.mock_rulebook}"
        return self.model_name

    def describe(self) -> dict:
        """Loggable descriptor; contains the variable name, never the secret."""
        out = {"name": self.label, "kind": self.kind, "model_name": self.model_name}
        if self.kind == "mock":
            out["mock_rulebook"] = self.mock_rulebook
        else:
            out["base_url"] = self.base_url
            out["auth_ref"] = self.auth_ref
        return out


class TextModel(Protocol):
    def generate(self, prompt: str, params: GenerationParams) -> str: ...


@dataclass
class BatchItem:
    """One slot of a batch result: either ``text`` or ``error`` is set."""

    index: int
    text: Optional[str] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def error_kind(self) -> Optional[str]:
        return type(self.error).__name__ if self.error is not None else None

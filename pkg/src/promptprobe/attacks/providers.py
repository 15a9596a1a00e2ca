"""Word-substitution candidate providers."""
from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable

from ..errors import UnknownProvider


def read_lexicon(text: str) -> dict[str, tuple]:
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        word, _, rest = line.partition("\t")
        word = word.strip().lower()
        cands = [c.strip() for c in rest.split(",") if c.strip()]
        table[word] = tuple(dict.fromkeys(c for c in cands if c.lower() != word))
    return table


class LexiconProvider:
    def __init__(self, table: dict[str, tuple]):
        self.table = table

    @classmethod
    def from_file(cls, path) -> "LexiconProvider":
        return cls(read_lexicon(Path(path).read_text(encoding="utf-8")))

    def __call__(self, word: str) -> list[str]:
        return [c for c in self.table.get(word.lower(), ()) if c.lower() != word.lower()]


@lru_cache(maxsize=1)
def default_lexicon() -> LexiconProvider:
    res = resources.files("promptprobe") / "data" / "attacks" / "synonyms.tsv"
    return LexiconProvider(read_lexicon(res.read_text(encoding="utf-8")))


PROVIDERS: dict[str, Callable[[], Callable[[str], list]]] = {"lexicon": default_lexicon}


def register_provider(provider_id: str, factory: Callable[[], Callable[[str], list]]) -> None:
    PROVIDERS[provider_id] = factory


def word_candidates(provider_id: str, word: str) -> list[str]:
    try:
        provider = PROVIDERS[provider_id]()
    except KeyError:
        raise UnknownProvider(f"no candidate provider {provider_id!r}") from None
    return provider(word)

"""Turning raw model text into predictions."""
from __future__ import annotations

import re
from typing import Mapping, Optional, Sequence

UNPARSED = "unparsed"

_PUNCT = re.compile(r"[^\w\s]")
_SPACE = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase, turn punctuation (except ``_``) into spaces, squeeze spaces."""
    return _SPACE.sub(" ", _PUNCT.sub(" ", text.lower())).strip()


def _vocabulary(label_space: Sequence[str], projection: Optional[Mapping[str, str]]) -> dict[str, str]:
    vocab: dict[str, str] = {}
    for label in label_space:
        surface = (projection or {}).get(label, label)
        vocab.setdefault(normalize(surface), label)
    for label in label_space:
        vocab.setdefault(normalize(label), label)
    vocab.pop("", None)
    return vocab


def process_output(raw: str, label_space: Sequence[str], projection: Optional[Mapping[str, str]] = None) -> str:
    """Map a completion onto a canonical label, or ``"unparsed"``.

    Tried in order: whole-text exact match, substring match with longer
    vocabulary words taking precedence (a tie between distinct labels of
    the same length is ambiguous and falls through), then the first token of
    the first non-empty line.
    """
    vocab = _vocabulary(label_space, projection)
    text = normalize(raw or "")
    if text in vocab:
        return vocab[text]

    by_length: dict[int, list[str]] = {}
    for word in vocab:
        by_length.setdefault(len(word), []).append(word)
    for length in sorted(by_length, reverse=True):
        hits = {vocab[w] for w in by_length[length] if w in text}
        if len(hits) == 1:
            return hits.pop()
        if len(hits) > 1:
            break

    for line in (raw or "").splitlines():
        line = normalize(line)
        if line:
            token = line.split(" ", 1)[0]
            return vocab.get(token, UNPARSED)
    return UNPARSED


_ANSWER_MARK = re.compile(r"(?:final answer|answer)\s*(?:is|:)\s*", re.IGNORECASE)


def extract_freeform(raw: str) -> str:
    """Pull a free-form answer out of a completion.

    Uses the text after the last "answer is"/"Answer:" marker when present,
    else the last non-empty line. Returns ``"unparsed"`` for blank output.
    """
    raw = raw or ""
    marks = list(_ANSWER_MARK.finditer(raw))
    if marks:
        tail = raw[marks[-1].end() :].strip()
        candidate = tail.splitlines()[0] if tail else ""
    else:
        lines = [ln for ln in raw.splitlines() if ln.strip()]
        candidate = lines[-1] if lines else ""
    candidate = normalize_freeform(candidate)
    return candidate or UNPARSED


def normalize_freeform(text: str) -> str:
    text = _SPACE.sub("", text.strip().lower())
    return text.strip("*\"'`").rstrip(".").strip("*\"'`")

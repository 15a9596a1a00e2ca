"""Single-character edits in the spirit of typo attacks."""
from __future__ import annotations

import random
import string

from ..errors import InvalidPosition

EDITS = ("insert", "delete", "swap_adjacent", "substitute_neighbor")

_ROWS = ("1234567890", "qwertyuiop", "asdfghjkl", "zxcvbnm")


def _keyboard_neighbors() -> dict[str, str]:
    pos = {ch: (r, c) for r, row in enumerate(_ROWS) for c, ch in enumerate(row)}
    out = {}
    for ch, (r, c) in pos.items():
        near = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if (dr, dc) == (0, 0):
                    continue
                rr, cc = r + dr, c + dc
                if 0 <= rr < len(_ROWS) and 0 <= cc < len(_ROWS[rr]):
                    near.append(_ROWS[rr][cc])
        out[ch] = "".join(sorted(near))
    return out


NEIGHBORS = _keyboard_neighbors()


def _rng(seed, word, edit, position) -> random.Random:
    return random.Random(f"{seed}\x00{word}\x00{edit}\x00{position}")


def _match_case(ch: str, like: str) -> str:
    return ch.upper() if like.isupper() else ch


def valid_positions(word: str, edit: str) -> range:
    n = len(word)
    if edit == "insert":
        return range(n + 1)
    if edit == "delete":
        return range(n) if n >= 2 else range(0)
    if edit == "swap_adjacent":
        return range(n - 1) if n >= 2 else range(0)
    if edit == "substitute_neighbor":
        return range(n)
    raise ValueError(f"unknown edit {edit!r}")


def perturb_char(word: str, edit: str, position: int, seed: int = 0) -> str:
    """Apply one character edit to ``word`` at ``position``.

    ``swap_adjacent`` exchanges characters ``position`` and ``position + 1``.
    Inserted and substituted characters are keyboard neighbours picked by a
    generator seeded from (seed, word, edit, position).
    """
    if position not in valid_positions(word, edit):
        raise InvalidPosition(f"{edit} at {position} is invalid for {word!r}")
    rng = _rng(seed, word, edit, position)
    if edit == "delete":
        return word[:position] + word[position + 1 :]
    if edit == "swap_adjacent":
        a, b = word[position], word[position + 1]
        if a == b:
            raise InvalidPosition(f"swapping equal characters at {position} leaves {word!r} unchanged")
        return word[:position] + b + a + word[position + 2 :]
    if edit == "substitute_neighbor":
        ch = word[position]
        near = NEIGHBORS.get(ch.lower())
        if not near:
            raise InvalidPosition(f"{ch!r} has no keyboard neighbours")
        return word[:position] + _match_case(rng.choice(near), ch) + word[position + 1 :]
    # insert: a neighbour of the character it lands next to
    anchor = word[position - 1] if position > 0 else (word[0] if word else "a")
    pool = NEIGHBORS.get(anchor.lower()) or string.ascii_lowercase
    pool = "".join(c for c in pool if c.isalpha()) or string.ascii_lowercase
    return word[:position] + rng.choice(pool) + word[position:]


def single_edits(word: str, seed: int = 0) -> list[str]:
    """All distinct words one edit away that ``perturb_char`` can produce."""
    out = set()
    for edit in EDITS:
        for pos in valid_positions(word, edit):
            try:
                out.add(perturb_char(word, edit, pos, seed))
            except InvalidPosition:
                continue
    out.discard(word)
    return sorted(out)

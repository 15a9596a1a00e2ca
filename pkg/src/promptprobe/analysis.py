"""Leaderboards and attack word statistics computed from run files."""
from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Optional

from .errors import EmptyRun
from .pipeline.records import read_run_dir

VIEWS = ("standard", "attack", "method", "dynamic")


@dataclass
class Table:
    title: str
    columns: list
    rows: list  # (label, {column: value}, mean)
    footer: dict
    higher_is_better: bool = True

    def header(self) -> list[str]:
        return ["endpoint", *self.columns, "mean"]

    def cells(self) -> list[list[str]]:
        out = []
        for label, values, mean in self.rows:
            out.append([label, *(_fmt(values.get(c)) for c in self.columns), _fmt(mean)])
        footer_mean = fmean(self.footer.values()) if self.footer else None
        out.append(["mean", *(_fmt(self.footer.get(c)) for c in self.columns), _fmt(footer_mean)])
        return out


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def load_runs(run_dir) -> list[dict]:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise EmptyRun(f"{run_dir} is not a directory")
    docs = read_run_dir(run_dir)
    if not any(d["kind"] == "run_record" for d in docs):
        raise EmptyRun(f"no run records under {run_dir}")
    return docs


def _primary_metric(doc: dict) -> float:
    m = doc["metrics"]
    return m["accuracy"] if "accuracy" in m else next(iter(m.values()))


def _select(docs: list[dict], view: str):
    """Yield (endpoint, column, value) triples for a view."""
    for d in docs:
        if d["kind"] != "run_record" or d["status"] != "ok":
            continue
        ep = d["endpoint"]["name"]
        plain = d["method"] == "none" and d["attack"] == "none"
        freeform = not d["label_space"]
        if view == "standard" and plain and not freeform:
            yield ep, d["dataset"], _primary_metric(d)
        elif view == "dynamic" and plain and freeform:
            yield ep, d["dataset"], _primary_metric(d)
        elif view == "attack" and d["attack_summary"] is not None:
            yield ep, d["dataset"], d["attack_summary"]["drop_rate"]
        elif view == "method" and d["method"] != "none" and d["attack"] == "none":
            yield ep, d["method"], _primary_metric(d)


def leaderboard(docs: list[dict], view: str = "standard") -> Table:
    """One row per endpoint, one column per dataset (per method for the method view).

    Each cell averages every matching record (e.g. over templates). Rows are
    ranked by their mean: descending for score views, ascending for the
    attack view where the value is a drop rate.
    """
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}; expected one of {VIEWS}")
    buckets: dict = defaultdict(list)
    for ep, col, value in _select(docs, view):
        buckets[ep, col].append(value)
    if not buckets:
        raise EmptyRun(f"no run records match the {view} view")
    columns = sorted({col for _, col in buckets})
    endpoints = sorted({ep for ep, _ in buckets})
    higher = view != "attack"
    rows = []
    for ep in endpoints:
        values = {c: fmean(buckets[ep, c]) for c in columns if (ep, c) in buckets}
        rows.append((ep, values, fmean(values.values())))
    rows.sort(key=lambda r: (-r[2] if higher else r[2], r[0]))
    footer = {c: fmean(r[1][c] for r in rows if c in r[1]) for c in columns}
    titles = {
        "standard": "accuracy by dataset",
        "dynamic": "accuracy on generated datasets",
        "attack": "attack drop rate by dataset (lower is more robust)",
        "method": "accuracy by prompt-engineering method",
    }
    return Table(titles[view], columns, rows, footer, higher)


def render_text(table: Table) -> str:
    grid = [table.header(), *table.cells()]
    widths = [max(len(row[i]) for row in grid) for i in range(len(grid[0]))]
    lines = [f"# {table.title}"]
    for n, row in enumerate(grid):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if n == 0 or n == len(grid) - 2:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.header())
    writer.writerows(table.cells())
    return buf.getvalue()


def word_frequencies(docs: list[dict]) -> list[tuple[str, int]]:
    """Original words perturbed by successful character/word attacks, most frequent first.

    A word counts once per attack result even when several character edits
    hit it; successful means a positive drop rate.
    """
    counts: Counter = Counter()
    for d in docs:
        if d["kind"] != "attack_result" or d["drop_rate"] <= 0 or d["level"] not in ("character", "word"):
            continue
        first: dict = {}
        for edit in d["perturbation_log"]:
            first.setdefault(edit["word_index"], edit["before"])
        counts.update(word.lower() for word in first.values())
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def render_wordfreq(freqs: list[tuple[str, int]], top: Optional[int] = None) -> str:
    rows = freqs[:top] if top else freqs
    width = max([len("word")] + [len(w) for w, _ in rows])
    lines = [f"{'word'.ljust(width)}  count"]
    lines += [f"{w.ljust(width)}  {c:5d}" for w, c in rows]
    return "\n".join(lines) + "\n"

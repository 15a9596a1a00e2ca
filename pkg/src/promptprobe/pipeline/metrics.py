"""Metrics over per-sample results.

Values are accumulated as exact fractions and converted to float once, so a
metric is reproducible bit-for-bit from its per-sample inputs.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from ..errors import EmptyRun
from .parsing import normalize_freeform

METRICS = ("accuracy", "macro_f1", "exact_match")


def _get(sample, key):
    return sample[key] if isinstance(sample, dict) else getattr(sample, key)


def accuracy(per_sample) -> Fraction:
    return Fraction(sum(1 for s in per_sample if _get(s, "correct")), len(per_sample))


def f1_for_label(preds: Sequence[str], golds: Sequence[str], label: str) -> Fraction:
    tp = sum(1 for p, g in zip(preds, golds) if p == label and g == label)
    fp = sum(1 for p, g in zip(preds, golds) if p == label and g != label)
    fn = sum(1 for p, g in zip(preds, golds) if p != label and g == label)
    if tp + fp + fn == 0:
        # label absent from both sides: nothing was missed or invented
        return Fraction(1)
    return Fraction(2 * tp, 2 * tp + fp + fn)


def macro_f1(per_sample, label_space: Optional[Sequence[str]] = None) -> Fraction:
    preds = [_get(s, "prediction") for s in per_sample]
    golds = [_get(s, "gold") for s in per_sample]
    labels = list(label_space) if label_space else sorted(set(golds))
    return sum((f1_for_label(preds, golds, lab) for lab in labels), Fraction(0)) / len(labels)


def exact_match(per_sample) -> Fraction:
    hits = sum(
        1 for s in per_sample if normalize_freeform(str(_get(s, "prediction"))) == normalize_freeform(str(_get(s, "gold")))
    )
    return Fraction(hits, len(per_sample))


def score(per_sample, metric: str, label_space: Optional[Sequence[str]] = None) -> float:
    if not per_sample:
        raise EmptyRun("cannot score an empty run")
    if metric == "accuracy":
        value = accuracy(per_sample)
    elif metric == "macro_f1":
        value = macro_f1(per_sample, label_space)
    elif metric == "exact_match":
        value = exact_match(per_sample)
    else:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return float(value)


def drop_rate(clean: float, attacked: float) -> float:
    """Relative loss ``(clean - attacked) / clean``; defined as 0 when clean is 0."""
    if clean <= 0:
        return 0.0
    return (clean - attacked) / clean

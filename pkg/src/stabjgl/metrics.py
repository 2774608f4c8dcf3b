"""Edge-set comparison: confusion counts, precision/recall, Matthews correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import EdgeSet


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(estimated: EdgeSet, truth: EdgeSet) -> ConfusionCounts:
    """Classification counts over the p(p-1)/2 unordered node pairs."""
    if estimated.p != truth.p:
        raise ValueError(f"node counts differ: {estimated.p} vs {truth.p}")
    tp = len(estimated.edges & truth.edges)
    fp = len(estimated.edges) - tp
    fn = len(truth.edges) - tp
    tn = truth.p * (truth.p - 1) // 2 - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def precision_recall(c: ConfusionCounts):
    """``(precision, recall)``; either is ``None`` when its denominator is zero."""
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else None
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    return precision, recall


def mcc_from_counts(c: ConfusionCounts) -> float:
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denom)


def mcc(a: EdgeSet, b: EdgeSet) -> float:
    """Matthews correlation between two graphs on the same nodes (0 if degenerate)."""
    return mcc_from_counts(confusion(a, b))

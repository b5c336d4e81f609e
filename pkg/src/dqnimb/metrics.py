"""Confusion-matrix accounting and the two imbalance-aware scores.

The positive class is the minority class throughout. Both scores follow the
printed formulas:

    g_mean    = sqrt( TP/(TP+FN) * TN/(TN+FP) )
    f_measure = sqrt( TP/(TP+FN) * TP/(TP+FP) )

Any factor with a zero denominator evaluates the whole score to 0, keeping
"higher is better" semantics and NaN out of reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.tn, self.fp) < 0:
            raise InputError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fn": self.fn, "tn": self.tn, "fp": self.fp}


def confusion(preds, truth, positive_label: int = 1) -> ConfusionMatrix:
    preds = np.asarray(preds)
    truth = np.asarray(truth)
    if preds.shape != truth.shape or preds.ndim != 1:
        raise InputError("preds and truth must be 1-D and the same length")
    pos_pred = preds == positive_label
    pos_true = truth == positive_label
    return ConfusionMatrix(
        tp=int(np.sum(pos_pred & pos_true)),
        fn=int(np.sum(~pos_pred & pos_true)),
        tn=int(np.sum(~pos_pred & ~pos_true)),
        fp=int(np.sum(pos_pred & ~pos_true)),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def g_mean(cm: ConfusionMatrix) -> float:
    sensitivity = _ratio(cm.tp, cm.tp + cm.fn)
    specificity = _ratio(cm.tn, cm.tn + cm.fp)
    return math.sqrt(sensitivity * specificity)


def f_measure(cm: ConfusionMatrix) -> float:
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    return math.sqrt(recall * precision)

"""Utility and group-fairness metrics for binary node classification.

All metrics are stored in ``[0, 1]``; reports scale by 100.  Groups that a
metric needs but which are empty raise :class:`DegenerateGroupError` rather
than silently returning 0.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .graphdata import GroupId

__all__ = [
    "PredictionSet",
    "MetricBundle",
    "DegenerateGroupError",
    "DegenerateMetricWarning",
    "accuracy",
    "binary_f1",
    "roc_auc",
    "delta_sp",
    "delta_eo",
    "group_accuracy",
    "evaluate",
]


class DegenerateGroupError(ValueError):
    """A metric's conditioning group (or class) is empty."""


class DegenerateMetricWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Scores with aligned ground truth and sensitive attribute.

    ``scores`` are logits; ``hard`` defaults to ``scores >= threshold`` with
    threshold 0, i.e. sigmoid probability >= 0.5.
    """

    scores: np.ndarray
    truth: np.ndarray
    sens: np.ndarray
    hard: np.ndarray = None
    threshold: float = 0.0

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        truth = np.asarray(self.truth).astype(np.int64).ravel()
        sens = np.asarray(self.sens).astype(np.int64).ravel()
        if not (len(scores) == len(truth) == len(sens)):
            raise ValueError("scores, truth and sens must have the same length")
        hard = (scores >= self.threshold).astype(np.int64)
        if self.hard is not None:
            given = np.asarray(self.hard).astype(np.int64).ravel()
            if not np.array_equal(given, hard):
                raise ValueError("hard labels disagree with scores at the threshold")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "sens", sens)
        object.__setattr__(self, "hard", hard)

    @classmethod
    def from_labels(cls, hard, truth, sens) -> "PredictionSet":
        """Build from hard 0/1 predictions (scores set to +-1)."""
        hard = np.asarray(hard, dtype=np.float64)
        return cls(2.0 * hard - 1.0, truth, sens)

    def __len__(self) -> int:
        return len(self.scores)

    def subset(self, mask) -> "PredictionSet":
        mask = np.asarray(mask)
        return PredictionSet(self.scores[mask], self.truth[mask], self.sens[mask],
                             threshold=self.threshold)


def _nonempty(p: PredictionSet) -> None:
    if len(p) == 0:
        raise ValueError("empty prediction set")


def accuracy(p: PredictionSet) -> float:
    _nonempty(p)
    return float(np.mean(p.hard == p.truth))


def binary_f1(p: PredictionSet) -> float:
    """F1 of the positive class.

    Returns 0 when there are no true positives.  When there are no positives
    at all, neither predicted nor actual, F1 is undefined; 0 is returned and a
    :class:`DegenerateMetricWarning` is issued.
    """
    _nonempty(p)
    tp = int(np.sum((p.hard == 1) & (p.truth == 1)))
    fp = int(np.sum((p.hard == 1) & (p.truth == 0)))
    fn = int(np.sum((p.hard == 0) & (p.truth == 1)))
    if tp == 0:
        if fp == 0 and fn == 0:
            warnings.warn("F1 undefined without positives; reporting 0",
                          DegenerateMetricWarning, stacklevel=2)
        return 0.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def roc_auc(p: PredictionSet) -> float:
    """Area under the ROC curve as the normalized Mann-Whitney U statistic
    (ties between a positive and a negative count one half)."""
    _nonempty(p)
    pos = p.truth == 1
    n_pos = int(pos.sum())
    n_neg = len(p) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateGroupError("ROC AUC needs both positive and negative examples")
    ranks = rankdata(p.scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _positive_rate(hard, mask, what: str) -> float:
    if not mask.any():
        raise DegenerateGroupError(f"no samples with {what}")
    return float(hard[mask].mean())


def delta_sp(p: PredictionSet) -> float:
    """Statistical parity gap ``|P(yhat=1|s=0) - P(yhat=1|s=1)|``."""
    _nonempty(p)
    r0 = _positive_rate(p.hard, p.sens == 0, "s=0")
    r1 = _positive_rate(p.hard, p.sens == 1, "s=1")
    return abs(r0 - r1)


def delta_eo(p: PredictionSet) -> float:
    """Equal-opportunity gap: absolute difference of true-positive rates."""
    _nonempty(p)
    pos = p.truth == 1
    r0 = _positive_rate(p.hard, pos & (p.sens == 0), "y=1, s=0")
    r1 = _positive_rate(p.hard, pos & (p.sens == 1), "y=1, s=1")
    return abs(r0 - r1)


def group_accuracy(p: PredictionSet) -> dict:
    """Accuracy within each non-empty (s, y) group."""
    _nonempty(p)
    grp = 2 * p.sens + p.truth
    correct = p.hard == p.truth
    out = {}
    for g in GroupId:
        mask = grp == g
        if mask.any():
            out[g] = float(correct[mask].mean())
    return out


@dataclass(frozen=True)
class MetricBundle:
    acc: float
    auc: float
    f1: float
    delta_sp: float
    delta_eo: float
    group_acc: dict

    def to_dict(self, percent: bool = False) -> dict:
        k = 100.0 if percent else 1.0
        out = {f: getattr(self, f) * k for f in ("acc", "auc", "f1", "delta_sp", "delta_eo")}
        out["group_acc"] = {g.name: v * k for g, v in self.group_acc.items()}
        return out

    def format_table(self) -> str:
        d = self.to_dict(percent=True)
        lines = [f"{'ACC':<8}{d['acc']:6.2f}", f"{'AUC':<8}{d['auc']:6.2f}",
                 f"{'F1':<8}{d['f1']:6.2f}", f"{'D_SP':<8}{d['delta_sp']:6.2f}",
                 f"{'D_EO':<8}{d['delta_eo']:6.2f}"]
        lines += [f"{g:<8}{v:6.2f}" for g, v in d["group_acc"].items()]
        return "\n".join(lines)


def evaluate(p: PredictionSet) -> MetricBundle:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        f1 = binary_f1(p)
    return MetricBundle(
        acc=accuracy(p), auc=roc_auc(p), f1=f1,
        delta_sp=delta_sp(p), delta_eo=delta_eo(p), group_acc=group_accuracy(p),
    )

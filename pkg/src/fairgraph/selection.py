"""Model-selection strategies: pick one epoch from a validation log.

``unified``
    Adaptive-threshold selection.  For each ratio in ``RATIOS`` the epoch must
    reach ``ratio`` times the log's best accuracy, AUC and F1; among those,
    the epoch with the smallest ``val_parity + val_equality`` wins.  The best
    fairness found so far carries over from one ratio to the next, so the
    literal procedure returns the fairness minimizer at the loosest ratio
    (0.90).  ``early_exit=True`` instead stops at the first ratio admitting
    any epoch.
``s1``
    Fixed accuracy / AUC floors, then fairness minimizer.
``s2``
    Lowest validation loss.
``s3``
    Highest validation AUC.

Within one pass over the log, ties go to the earliest epoch.  Across
ratios the unified rule only replaces its choice on a strictly smaller
fairness sum, so an epoch admitted at a stricter ratio keeps precedence over
an equally fair one admitted later.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .models import EpochLog, EpochRecord

__all__ = [
    "RATIOS",
    "SelectionResult",
    "NoQualifyingEpochError",
    "select_unified",
    "select_strategy1",
    "select_strategy2",
    "select_strategy3",
    "select",
]

RATIOS = (0.95, 0.94, 0.93, 0.92, 0.91, 0.90)
DEFAULT_ACC_FLOOR = 0.65
DEFAULT_ROC_FLOOR = 0.65


class NoQualifyingEpochError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionResult:
    best_epoch: int
    qualifying_ratio: float
    chosen_metrics: EpochRecord

    def to_dict(self) -> dict:
        rec = self.chosen_metrics
        return {
            "best_epoch": self.best_epoch,
            "qualifying_ratio": self.qualifying_ratio,
            "chosen_metrics": json.loads(rec.to_json()),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _records(log) -> list:
    records = list(log.records if isinstance(log, EpochLog) else log)
    if not records:
        raise ValueError("empty epoch log")
    return records


def select_unified(log, early_exit: bool = False, ratios=RATIOS) -> SelectionResult:
    records = _records(log)
    max_acc = max(r.val_acc for r in records)
    max_roc = max(r.val_roc for r in records)
    max_f1 = max(r.val_f1 for r in records)
    best_fairness = float("inf")
    best = None
    best_ratio = None
    for ratio in ratios:
        t_acc, t_roc, t_f1 = max_acc * ratio, max_roc * ratio, max_f1 * ratio
        for r in records:
            if (r.val_acc >= t_acc and r.val_roc >= t_roc and r.val_f1 >= t_f1
                    and r.fairness < best_fairness):
                best_fairness = r.fairness
                best = r
                best_ratio = ratio
        if early_exit and best is not None:
            break
    if best is None:
        raise NoQualifyingEpochError("no epoch meets the accuracy/AUC/F1 thresholds at any ratio")
    return SelectionResult(best.epoch, best_ratio, best)


def select_strategy1(log, acc_floor: float = DEFAULT_ACC_FLOOR,
                     roc_floor: float = DEFAULT_ROC_FLOOR) -> SelectionResult:
    records = _records(log)
    best = None
    for r in records:
        if r.val_acc >= acc_floor and r.val_roc >= roc_floor:
            if best is None or r.fairness < best.fairness:
                best = r
    if best is None:
        raise NoQualifyingEpochError(
            f"no epoch reaches acc >= {acc_floor} and roc >= {roc_floor}")
    return SelectionResult(best.epoch, None, best)


def select_strategy2(log) -> SelectionResult:
    records = _records(log)
    best = min(records, key=lambda r: r.val_loss)  # min keeps the first of ties
    return SelectionResult(best.epoch, None, best)


def select_strategy3(log) -> SelectionResult:
    records = _records(log)
    best = records[0]
    for r in records[1:]:
        if r.val_roc > best.val_roc:
            best = r
    return SelectionResult(best.epoch, None, best)


def select(log, strategy: str = "unified", early_exit: bool = False,
           acc_floor: float = None, roc_floor: float = None) -> SelectionResult:
    """Dispatch by strategy name: ``unified``, ``s1``, ``s2`` or ``s3``."""
    if strategy == "unified":
        return select_unified(log, early_exit=early_exit)
    if strategy == "s1":
        return select_strategy1(
            log,
            DEFAULT_ACC_FLOOR if acc_floor is None else acc_floor,
            DEFAULT_ROC_FLOOR if roc_floor is None else roc_floor,
        )
    if strategy == "s2":
        return select_strategy2(log)
    if strategy == "s3":
        return select_strategy3(log)
    raise ValueError(f"unknown selection strategy {strategy!r}")

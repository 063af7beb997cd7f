"""
Two-class evaluation metrics with frozen as the positive class

mAcc is the mean of the per-class recalls, not overall accuracy.
"""

from collections.abc import Sequence

from lakeice.core.exceptions import InvalidInputError, UndefinedMetricError
from lakeice.core.models import ConfusionMatrix, PixelLabel

M_ACC_DEFINITION = "mean of per-class recalls (frozen, non_frozen) x 100"
M_IOU_DEFINITION = "mean of per-class TP / (TP + FP + FN) x 100"


def confusion_matrix(
    truth: Sequence[PixelLabel], predicted: Sequence[PixelLabel]
) -> ConfusionMatrix:
    """
    Count agreement between ground truth and predictions.

    Raises:
        InvalidInputError: On length mismatch or unlabelled entries
    """
    if len(truth) != len(predicted):
        raise InvalidInputError(
            f"truth and predictions differ in length ({len(truth)} vs {len(predicted)})"
        )
    counts = {"tp": 0, "fn": 0, "fp": 0, "tn": 0}
    for t, p in zip(truth, predicted, strict=True):
        if t is PixelLabel.UNLABELED or p is PixelLabel.UNLABELED:
            raise InvalidInputError("Confusion counts need frozen / non_frozen labels only")
        if t is PixelLabel.FROZEN:
            counts["tp" if p is PixelLabel.FROZEN else "fn"] += 1
        else:
            counts["fp" if p is PixelLabel.FROZEN else "tn"] += 1
    return ConfusionMatrix(**counts)


def m_acc(cm: ConfusionMatrix) -> float:
    """Mean per-class recall, percent"""
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("mAcc undefined: no frozen ground-truth samples")
    if cm.tn + cm.fp == 0:
        raise UndefinedMetricError("mAcc undefined: no non_frozen ground-truth samples")
    recall_frozen = cm.tp / (cm.tp + cm.fn)
    recall_water = cm.tn / (cm.tn + cm.fp)
    return 100.0 * (recall_frozen + recall_water) / 2.0


def m_iou(cm: ConfusionMatrix) -> float:
    """Mean per-class intersection-over-union, percent"""
    union_frozen = cm.tp + cm.fp + cm.fn
    union_water = cm.tn + cm.fn + cm.fp
    if union_frozen == 0:
        raise UndefinedMetricError("mIoU undefined: frozen class never occurs")
    if union_water == 0:
        raise UndefinedMetricError("mIoU undefined: non_frozen class never occurs")
    return 100.0 * (cm.tp / union_frozen + cm.tn / union_water) / 2.0

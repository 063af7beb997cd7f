"""
Evaluation harness: stratified k-fold, leave-one-lake-out, leave-one-winter-out

Folds are planned up front from immutable sample lists, run independently and
reported in fold order, so running them concurrently gives the same report.
"""

import logging
from collections.abc import Sequence
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.model_selection import LeaveOneGroupOut, StratifiedKFold

from lakeice.classify.metrics import confusion_matrix, m_acc, m_iou
from lakeice.classify.registry import Classifier, ClassifierRegistry
from lakeice.classify.training_sets import usable_training_samples
from lakeice.core.exceptions import InvalidInputError, TrainingError, UndefinedMetricError
from lakeice.core.models import ConfusionMatrix, PixelLabel, PixelSample, SplitKind, SplitPlan

logger = logging.getLogger(__name__)


class Fold(BaseModel):
    """One train/test partition"""

    model_config = ConfigDict(frozen=True)

    index: int
    name: str
    train: tuple[PixelSample, ...]
    test: tuple[PixelSample, ...]


class FoldResult(BaseModel):
    index: int
    name: str
    n_train: int
    n_test: int
    confusion: ConfusionMatrix
    m_acc: float
    m_iou: float


class EvaluationReport(BaseModel):
    """Per-fold scores and their unweighted means"""

    classifier: str
    plan: SplitPlan
    folds: list[FoldResult] = Field(default_factory=list)
    mean_m_acc: float = 0.0
    mean_m_iou: float = 0.0


class GridRow(BaseModel):
    cost: float
    mean_m_acc: float
    mean_m_iou: float


class GridSearchResult(BaseModel):
    best_cost: float
    table: list[GridRow]


def _group_key(sample: PixelSample, kind: SplitKind) -> str:
    if kind == SplitKind.LEAVE_ONE_LAKE_OUT:
        return sample.lake_id
    return sample.winter.id


def plan_folds(samples: Sequence[PixelSample], plan: SplitPlan) -> list[Fold]:
    """
    Partition labelled samples into folds.

    k_fold shuffles with the plan seed and stratifies by class; the
    leave-one-out plans hold out one lake or one winter per fold, in sorted
    group order.

    Raises:
        InvalidInputError: If the data cannot be split as requested
    """
    data = usable_training_samples(samples)
    if not data:
        raise InvalidInputError("No labelled, non-cloudy samples to evaluate on")
    y = np.asarray([s.label is PixelLabel.FROZEN for s in data], dtype=int)
    placeholder = np.zeros((len(data), 1))

    if plan.kind == SplitKind.K_FOLD:
        smallest = int(min(np.count_nonzero(y), np.count_nonzero(1 - y)))
        if smallest < plan.k:
            raise InvalidInputError(
                f"{plan.k}-fold split needs at least {plan.k} samples per class, smallest class has {smallest}"
            )
        splitter = StratifiedKFold(n_splits=plan.k, shuffle=True, random_state=plan.seed)
        splits = splitter.split(placeholder, y)
        names = [f"fold {i + 1}" for i in range(plan.k)]
    else:
        groups = np.asarray([_group_key(s, plan.kind) for s in data])
        unique = np.unique(groups)
        what = "lake" if plan.kind == SplitKind.LEAVE_ONE_LAKE_OUT else "winter"
        if unique.size < 2:
            raise InvalidInputError(
                f"{plan.kind.value} needs at least two {what}s; holding out {unique[0]} leaves no training data"
            )
        splits = LeaveOneGroupOut().split(placeholder, y, groups)
        names = [str(g) for g in unique]

    folds = []
    for index, ((train_idx, test_idx), name) in enumerate(zip(splits, names, strict=True)):
        folds.append(
            Fold(
                index=index,
                name=name,
                train=tuple(data[i] for i in train_idx),
                test=tuple(data[i] for i in test_idx),
            )
        )
    return folds


def run_fold(fold: Fold, classifier: Classifier) -> FoldResult:
    """
    Train on the fold's training part and score its test part.

    Raises:
        TrainingError: If the training part holds a single class
        UndefinedMetricError: If the test part lacks a class
    """
    labels = {s.label for s in fold.train}
    if len(labels) < 2:
        raise TrainingError(f"{fold.name}: training set holds a single class")
    model = classifier.fit(fold.train)
    predicted = classifier.predict(model, fold.test)
    cm = confusion_matrix([s.label for s in fold.test], predicted)
    try:
        acc, iou = m_acc(cm), m_iou(cm)
    except UndefinedMetricError as e:
        raise UndefinedMetricError(f"{fold.name}: {e}") from e
    logger.debug("%s: mAcc %.2f mIoU %.2f", fold.name, acc, iou)
    return FoldResult(
        index=fold.index,
        name=fold.name,
        n_train=len(fold.train),
        n_test=len(fold.test),
        confusion=cm,
        m_acc=acc,
        m_iou=iou,
    )


def summarize(classifier_name: str, plan: SplitPlan, results: Sequence[FoldResult]) -> EvaluationReport:
    ordered = sorted(results, key=lambda r: r.index)
    return EvaluationReport(
        classifier=classifier_name,
        plan=plan,
        folds=ordered,
        mean_m_acc=float(np.mean([r.m_acc for r in ordered])),
        mean_m_iou=float(np.mean([r.m_iou for r in ordered])),
    )


def evaluate(
    samples: Sequence[PixelSample], classifier: Classifier, plan: SplitPlan
) -> EvaluationReport:
    """
    Score a classifier under a split plan.

    Returns:
        Per-fold confusion matrices, mAcc and mIoU, plus unweighted means
    """
    folds = plan_folds(samples, plan)
    return summarize(classifier.name, plan, [run_fold(f, classifier) for f in folds])


def grid_search(
    samples: Sequence[PixelSample],
    costs: Sequence[float],
    plan: SplitPlan,
    classifier_name: str = "linear_svm",
    **params: Any,
) -> GridSearchResult:
    """
    Pick the cost with the highest mean mAcc; ties go to the smallest cost.

    Raises:
        InvalidInputError: If costs is empty
    """
    if not costs:
        raise InvalidInputError("grid_search needs at least one candidate cost")
    folds = plan_folds(samples, plan)
    table = []
    for cost in sorted(costs):
        classifier = ClassifierRegistry.get_classifier(classifier_name, cost=cost, **params)
        report = summarize(classifier.name, plan, [run_fold(f, classifier) for f in folds])
        table.append(GridRow(cost=cost, mean_m_acc=report.mean_m_acc, mean_m_iou=report.mean_m_iou))
        logger.info("cost=%s: mean mAcc %.2f", cost, report.mean_m_acc)

    best = table[0]
    for row in table[1:]:
        if row.mean_m_acc > best.mean_m_acc:
            best = row
    return GridSearchResult(best_cost=best.cost, table=table)

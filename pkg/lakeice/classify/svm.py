"""
Linear SVM for frozen / non-frozen pixel classification

Training minimises the L2-regularised hinge loss with a free bias

    (1 / (2 C n)) ||w||^2 + (1 / n) sum_i max(0, 1 - y_i (w . x_i + b))

through its dual, max sum(alpha) - 1/2 ||sum_i alpha_i y_i x_i||^2 with
0 <= alpha_i <= C and sum_i alpha_i y_i = 0, solved by pairwise updates on the
maximal violating pair. Once w is fixed the bias is the exact minimiser of the
hinge term. Labels are frozen = +1, non_frozen = -1 and bands are z-scored with
the training mean/std.
"""

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, ValidationError

from lakeice.core.exceptions import InvalidInputError, TrainingError
from lakeice.core.files import atomic_write_text, require_file
from lakeice.core.models import LinearModel, PixelLabel, PixelSample

logger = logging.getLogger(__name__)

DEFAULT_MAX_EPOCHS = 200
DEFAULT_TOL = 1e-6
TAU = 1e-12

_SIGN = {PixelLabel.FROZEN: 1.0, PixelLabel.NON_FROZEN: -1.0}


class SolverTrace(BaseModel):
    """
    Convergence record of one solver run.

    One entry per epoch (n pair updates). Objectives are on the C n scale:
    primal 1/2 ||w||^2 + C sum(hinge) at the best bias for the current w,
    dual sum(alpha) - 1/2 ||w||^2.
    """

    epochs: int = 0
    converged: bool = False
    max_violation: float = float("inf")
    dual_objective: list[float] = Field(default_factory=list)
    primal_objective: list[float] = Field(default_factory=list)


def band_matrix(samples: Sequence[PixelSample]) -> NDArray[np.float64]:
    """Stack sample band vectors into an (n, K) array"""
    if not samples:
        raise InvalidInputError("No samples given")
    k = len(samples[0].bands)
    if any(len(s.bands) != k for s in samples):
        raise InvalidInputError("Samples have differing band counts")
    return np.asarray([s.bands for s in samples], dtype=np.float64)


def label_vector(samples: Sequence[PixelSample]) -> NDArray[np.float64]:
    """+1 / -1 targets; unlabeled samples are rejected"""
    try:
        return np.asarray([_SIGN[s.label] for s in samples], dtype=np.float64)
    except KeyError as e:
        raise TrainingError("Training samples must be labelled frozen or non_frozen") from e


def fit_standardizer(samples: Sequence[PixelSample]) -> tuple[list[float], list[float]]:
    """
    Per-band mean and (population) standard deviation.

    Raises:
        TrainingError: With fewer than 2 samples or a zero-variance band
    """
    if len(samples) < 2:
        raise TrainingError(f"Standardisation needs at least 2 samples, got {len(samples)}")
    x = band_matrix(samples)
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    flat = np.flatnonzero(~(stds > 0))
    if flat.size:
        idx = int(flat[0])
        raise TrainingError(f"Band {idx} (b{idx + 1}) has zero variance in the training set")
    return means.tolist(), stds.tolist()


def best_bias(scores: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    """
    Exact minimiser over b of sum_i max(0, 1 - y_i (s_i + b)).

    The sum is convex and piecewise linear with kinks at t_i = y_i - s_i, so a
    minimum lies on a kink. A flat minimum returns the middle of its interval.
    """
    t = y - scores
    pos = np.sort(t[y > 0])
    neg = np.sort(t[y < 0])
    pos_cum = np.concatenate([[0.0], np.cumsum(pos)])
    neg_cum = np.concatenate([[0.0], np.cumsum(neg)])
    kinks = np.sort(t)

    # positives with t_i > b cost t_i - b, negatives with t_i < b cost b - t_i
    k_pos = np.searchsorted(pos, kinks, side="right")
    above = (pos_cum[-1] - pos_cum[k_pos]) - (len(pos) - k_pos) * kinks
    k_neg = np.searchsorted(neg, kinks, side="left")
    below = k_neg * kinks - neg_cum[k_neg]
    totals = above + below

    lowest = float(totals.min())
    flat = kinks[totals <= lowest + 1e-12 * max(1.0, lowest)]
    return float(0.5 * (flat[0] + flat[-1]))


def _objectives(
    x: NDArray[np.float64],
    y: NDArray[np.float64],
    w: NDArray[np.float64],
    alpha: NDArray[np.float64],
    cost: float,
) -> tuple[float, float, float]:
    scores = x @ w
    bias = best_bias(scores, y)
    half_norm = 0.5 * float(w @ w)
    dual = float(alpha.sum()) - half_norm
    primal = half_norm + cost * float(np.maximum(0.0, 1.0 - y * (scores + bias)).sum())
    return dual, primal, bias


def _violating_pair(
    grad: NDArray[np.float64], y: NDArray[np.float64], alpha: NDArray[np.float64], cost: float
) -> tuple[int, int, float]:
    """Indices (i, j) of the maximal violating pair and their KKT gap"""
    score = -y * grad
    up = np.where(y > 0, alpha < cost, alpha > 0)
    low = np.where(y > 0, alpha > 0, alpha < cost)
    if not up.any() or not low.any():
        return 0, 0, 0.0
    i = int(np.argmax(np.where(up, score, -np.inf)))
    j = int(np.argmin(np.where(low, score, np.inf)))
    return i, j, float(score[i] - score[j])


def _pair_step(
    ai: float, aj: float, gi: float, gj: float, opposite: bool, quad: float, cost: float
) -> tuple[float, float]:
    """Maximise the dual along the feasible line of (alpha_i, alpha_j), clipped to the box"""
    quad = quad if quad > 0.0 else TAU
    if opposite:
        delta = (-gi - gj) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0:
            if aj < 0:
                aj, ai = 0.0, diff
        elif ai < 0:
            ai, aj = 0.0, -diff
        if diff > 0:
            if ai > cost:
                ai, aj = cost, cost - diff
        elif aj > cost:
            aj, ai = cost, cost + diff
    else:
        delta = (gi - gj) / quad
        total = ai + aj
        ai -= delta
        aj += delta
        if total > cost:
            if ai > cost:
                ai, aj = cost, total - cost
        elif aj < 0:
            aj, ai = 0.0, total
        if total > cost:
            if aj > cost:
                aj, ai = cost, total - cost
        elif ai < 0:
            ai, aj = 0.0, total
    return ai, aj


def solve_dual_smo(
    x: NDArray[np.float64],
    y: NDArray[np.float64],
    cost: float,
    seed: int = 0,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    tol: float = DEFAULT_TOL,
) -> tuple[NDArray[np.float64], float, SolverTrace]:
    """
    Pairwise dual ascent for the L1-loss linear SVM with a free bias.

    Each step picks the maximal violating pair and solves the two-variable
    subproblem exactly, keeping sum_i alpha_i y_i = 0. The seed shuffles the
    sample order, which fixes how ties between equally violating samples break.
    Stops once the KKT gap of the pair drops below tol.

    Returns:
        Weight vector over the columns of x, the bias, and the solver trace
    """
    n, d = x.shape
    order = np.random.default_rng(seed).permutation(n)
    x, y = x[order], y[order]
    alpha = np.zeros(n)
    w = np.zeros(d)
    grad = -np.ones(n)
    bias = 0.0
    trace = SolverTrace()

    for epoch in range(1, max_epochs + 1):
        gap = 0.0
        for _ in range(n):
            i, j, gap = _violating_pair(grad, y, alpha, cost)
            if gap < tol:
                break
            quad = float(np.sum((x[i] - x[j]) ** 2))
            ai, aj = _pair_step(alpha[i], alpha[j], grad[i], grad[j], y[i] != y[j], quad, cost)
            w += (ai - alpha[i]) * y[i] * x[i] + (aj - alpha[j]) * y[j] * x[j]
            alpha[i], alpha[j] = ai, aj
            grad = y * (x @ w) - 1.0

        dual, primal, bias = _objectives(x, y, w, alpha, cost)
        trace.dual_objective.append(dual)
        trace.primal_objective.append(primal)
        trace.epochs = epoch
        trace.max_violation = gap
        if gap < tol:
            trace.converged = True
            break

    if not trace.converged:
        logger.warning(
            "SVM solver stopped after %d epochs (violation %.3g > tol %.3g)",
            trace.epochs,
            trace.max_violation,
            tol,
        )
    return w, bias, trace


def train_linear_svm_traced(
    samples: Sequence[PixelSample],
    cost: float,
    seed: int = 0,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    tol: float = DEFAULT_TOL,
) -> tuple[LinearModel, SolverTrace]:
    """train_linear_svm that also returns the solver trace"""
    if not samples:
        raise TrainingError("Cannot train on an empty sample set")
    if not cost > 0:
        raise InvalidInputError(f"SVM cost must be positive, got {cost}")
    y = label_vector(samples)
    if np.all(y > 0) or np.all(y < 0):
        raise TrainingError("Training set holds a single class; both frozen and non_frozen are needed")

    means, stds = fit_standardizer(samples)
    z = (band_matrix(samples) - np.asarray(means)) / np.asarray(stds)
    w, bias, trace = solve_dual_smo(z, y, cost, seed=seed, max_epochs=max_epochs, tol=tol)

    model = LinearModel(
        weights=w.tolist(),
        bias=bias,
        band_means=means,
        band_stds=stds,
        cost=cost,
    )
    logger.debug(
        "Trained linear SVM on %d samples (cost=%s, epochs=%d)", len(samples), cost, trace.epochs
    )
    return model, trace


def train_linear_svm(
    samples: Sequence[PixelSample],
    cost: float,
    seed: int = 0,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    tol: float = DEFAULT_TOL,
) -> LinearModel:
    """
    Fit a linear SVM on labelled samples.

    Args:
        samples: Labelled samples (frozen / non_frozen), both classes present
        cost: Misclassification cost C
        seed: Seed for the coordinate order
        max_epochs: Upper bound on full passes over the data
        tol: Projected-gradient tolerance

    Returns:
        LinearModel carrying its standardisation

    Raises:
        TrainingError: On empty, single-class or unlabelled input
    """
    model, _ = train_linear_svm_traced(samples, cost, seed, max_epochs, tol)
    return model


def decision_scores(model: LinearModel, samples: Sequence[PixelSample]) -> NDArray[np.float64]:
    x = band_matrix(samples)
    if x.shape[1] != model.n_bands:
        raise InvalidInputError(
            f"Band count mismatch: model expects {model.n_bands}, samples have {x.shape[1]}"
        )
    z = (x - np.asarray(model.band_means)) / np.asarray(model.band_stds)
    return z @ np.asarray(model.weights) + model.bias


def predict_many(model: LinearModel, samples: Sequence[PixelSample]) -> list[PixelLabel]:
    """Vectorised predict(); a score of exactly 0 is frozen"""
    if not samples:
        return []
    scores = decision_scores(model, samples)
    return [PixelLabel.FROZEN if s >= 0.0 else PixelLabel.NON_FROZEN for s in scores]


def predict(model: LinearModel, sample: PixelSample) -> PixelLabel:
    """Classify one sample"""
    return predict_many(model, [sample])[0]


def save_model(path: Path, model: LinearModel) -> Path:
    return atomic_write_text(path, model.model_dump_json(indent=2) + "\n")


def load_model(path: Path) -> LinearModel:
    require_file(path, "model")
    try:
        return LinearModel.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise InvalidInputError(f"Invalid model file {path}: {e.errors()[0]['msg']}") from e

"""
Training-set selection

Per-pixel ground truth only exists on non-transition days, when the whole
lake is frozen or the whole lake is open water.
"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from datetime import date

import numpy as np

from lakeice.core.models import PixelLabel, PixelSample

logger = logging.getLogger(__name__)

NON_FROZEN_MONTHS = (9,)
FROZEN_MONTHS = (2,)


def usable_training_samples(samples: Iterable[PixelSample]) -> list[PixelSample]:
    """Labelled, non-cloudy samples"""
    return [s for s in samples if s.label is not PixelLabel.UNLABELED and not s.cloudy]


def non_transition_training_set(
    samples: Sequence[PixelSample], frozen_fractions: Mapping[tuple[str, date], float]
) -> list[PixelSample]:
    """
    Keep labels only on days the lake is completely frozen or completely open.

    Args:
        samples: Labelled samples
        frozen_fractions: True frozen fraction in [0, 1] per (lake_id, date)

    Returns:
        The same samples; labels on transition days (or days without a known
        fraction) are set to unlabeled
    """
    out = []
    dropped = 0
    for s in samples:
        fraction = frozen_fractions.get((s.lake_id, s.date))
        if s.label is not PixelLabel.UNLABELED and fraction not in (0.0, 1.0):
            s = s.model_copy(update={"label": PixelLabel.UNLABELED})
            dropped += 1
        out.append(s)
    logger.debug("Unlabelled %d transition-day samples", dropped)
    return out


def auxiliary_training_set(
    samples: Iterable[PixelSample],
    non_frozen_months: Sequence[int] = NON_FROZEN_MONTHS,
    frozen_months: Sequence[int] = FROZEN_MONTHS,
) -> list[PixelSample]:
    """
    Label clear acquisitions from months with a known state.

    Returns:
        Non-cloudy samples from the given months, labelled non_frozen or frozen
    """
    out = []
    for s in samples:
        if s.cloudy:
            continue
        if s.date.month in non_frozen_months:
            out.append(s.model_copy(update={"label": PixelLabel.NON_FROZEN}))
        elif s.date.month in frozen_months:
            out.append(s.model_copy(update={"label": PixelLabel.FROZEN}))
    return out


def subsample(samples: Sequence[PixelSample], max_samples: int | None, seed: int) -> list[PixelSample]:
    """Seeded subset of at most max_samples, in input order"""
    if max_samples is None or len(samples) <= max_samples:
        return list(samples)
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(samples), size=max_samples, replace=False))
    return [samples[i] for i in keep]

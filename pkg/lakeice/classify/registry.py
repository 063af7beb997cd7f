"""
Classifier Registry - maps classifier names to implementations

evaluate() and grid_search() accept anything with the Classifier interface;
only the linear SVM ships.
"""

from collections.abc import Sequence
from typing import Any, Protocol

from lakeice.classify.svm import (
    DEFAULT_MAX_EPOCHS,
    DEFAULT_TOL,
    predict_many,
    train_linear_svm,
)
from lakeice.core.config import DEFAULT_COST
from lakeice.core.exceptions import InvalidInputError
from lakeice.core.models import LinearModel, PixelLabel, PixelSample


class Classifier(Protocol):
    """Train/predict contract of a pluggable pixel classifier"""

    name: str

    def fit(self, samples: Sequence[PixelSample]) -> Any: ...

    def predict(self, model: Any, samples: Sequence[PixelSample]) -> list[PixelLabel]: ...


class LinearSvmClassifier:
    """Linear SVM with a free bias, trained by pairwise dual updates"""

    name = "linear_svm"

    def __init__(
        self,
        cost: float = DEFAULT_COST,
        seed: int = 0,
        max_epochs: int = DEFAULT_MAX_EPOCHS,
        tol: float = DEFAULT_TOL,
    ):
        self.cost = cost
        self.seed = seed
        self.max_epochs = max_epochs
        self.tol = tol

    def fit(self, samples: Sequence[PixelSample]) -> LinearModel:
        return train_linear_svm(
            samples, self.cost, seed=self.seed, max_epochs=self.max_epochs, tol=self.tol
        )

    def predict(self, model: LinearModel, samples: Sequence[PixelSample]) -> list[PixelLabel]:
        return predict_many(model, samples)


class ClassifierRegistry:
    """
    Central registry for classifiers.

    Maps classifier names to their implementation classes.
    """

    _classifiers: dict[str, type] = {
        LinearSvmClassifier.name: LinearSvmClassifier,
    }

    @classmethod
    def get_classifier(cls, name: str, **params: Any) -> Classifier:
        """
        Get a classifier instance by name.

        Args:
            name: Registered classifier name
            **params: Constructor parameters (e.g. cost, seed)

        Returns:
            Classifier instance

        Raises:
            InvalidInputError: If no classifier is registered under name
        """
        classifier_class = cls._classifiers.get(name)
        if not classifier_class:
            raise InvalidInputError(
                f"No classifier registered as {name!r} (available: {', '.join(cls.list_classifiers())})"
            )
        return classifier_class(**params)

    @classmethod
    def list_classifiers(cls) -> list[str]:
        """List all registered classifier names"""
        return sorted(cls._classifiers)

    @classmethod
    def has_classifier(cls, name: str) -> bool:
        """Check if a classifier is registered"""
        return name in cls._classifiers


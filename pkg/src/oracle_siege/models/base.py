"""Shared pieces for the from-scratch classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any

import numpy as np


class TrainingError(ValueError):
    """Raised when a training set cannot produce a meaningful model."""


@dataclass(frozen=True)
class TrainConfig:
    # random forest
    n_trees: int = 100
    max_depth: int = 10
    max_features: int | None = None  # None -> ceil(sqrt(k))
    # linear SVM
    svm_lambda: float = 1e-3
    svm_epochs: int = 200
    svm_lr: float = 0.01
    # shallow network
    hidden: int = 32
    nn_epochs: int = 200
    nn_lr: float = 0.01
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "svm_epochs", "hidden", "nn_epochs", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_features is not None and self.max_features <= 0:
            raise ValueError("max_features must be positive")
        for name in ("svm_lr", "nn_lr"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite")
        if not (np.isfinite(self.svm_lambda) and self.svm_lambda >= 0):
            raise ValueError("svm_lambda must be nonnegative")

    def replace(self, **changes) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        scale = X.std(axis=0)
        scale[scale < 1e-12] = 1.0
        return cls(X.mean(axis=0), scale)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


@dataclass
class Classifier:
    """Common surface: integer-indexed classes with arbitrary hashable labels.

    ``predict_batch`` returns class indices and a per-row score for the
    predicted class (or ``None`` when the backend has no natural score).
    Ties always resolve to the lowest class index.
    """

    classes: list = field(default_factory=list)
    seed: int = 0
    arch: str = ""
    metrics: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        raise NotImplementedError

    def class_scores(self, X: np.ndarray) -> np.ndarray | None:
        """Per-class score matrix, shape (n, n_classes); higher favours the class."""
        raise NotImplementedError

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        X = self._check(X)
        S = self.class_scores(X)
        idx = np.argmax(S, axis=1)  # argmax takes the first maximum
        return idx, S[np.arange(len(X)), idx]

    def predict_labels(self, X: np.ndarray) -> list:
        idx, _ = self.predict_batch(X)
        return [self.classes[i] for i in idx]

    def score_for(self, X: np.ndarray, label) -> np.ndarray | None:
        S = self.class_scores(self._check(X))
        if S is None:
            return None
        return S[:, self.classes.index(label)]

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def describe(self) -> dict[str, Any]:
        return {"arch": self.arch, "classes": [str(c) for c in self.classes], "seed": self.seed}


def label_indices(labels, classes: list | None = None) -> tuple[list, np.ndarray]:
    """Map labels to class indices.

    Without an explicit ``classes`` order the classes are sorted, so the
    mapping does not depend on the order of the training rows.
    """
    if classes is None:
        uniq = set(labels)
        try:
            classes = sorted(uniq)
        except TypeError:
            classes = sorted(uniq, key=str)
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        idx = np.array([lookup[lab] for lab in labels], dtype=int)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not among classes") from None
    return list(classes), idx

"""Training entry points used by the oracle and by the adversary."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .base import Classifier, Standardizer, TrainConfig, TrainingError, label_indices
from .forest import RandomForest, fit_forest
from .mlp import ShallowNet, fit_shallow_net
from .svm import LinearSVM, fit_linear_svm

ARCHITECTURES = ("rf", "svm", "nn")
TARGET, OUTLIER = "target", "outlier"
YES, NO = "YES", "NO"


class DegenerateSeedWarning(UserWarning):
    """The substitute's training set has identical samples with conflicting labels."""


@dataclass
class ConstantClassifier(Classifier):
    """Predicts a single class; backs a one-principal system."""

    k: int = 0

    @property
    def n_features(self):
        return self.k

    def class_scores(self, X):
        return np.ones((len(X), len(self.classes)))


def _fit(arch: str, X: np.ndarray, y: np.ndarray, classes: list, cfg: TrainConfig) -> Classifier:
    n_classes = len(classes)
    if arch == "rf":
        trees = fit_forest(
            X, y, n_classes, n_trees=cfg.n_trees, max_depth=cfg.max_depth,
            max_features=cfg.max_features, seed=cfg.seed,
        )
        return RandomForest(classes=classes, seed=cfg.seed, arch="rf", trees=trees, k=X.shape[1])
    scaler = Standardizer.fit(X)
    Z = scaler(X)
    if arch == "svm":
        W, b = fit_linear_svm(
            Z, y, n_classes, lam=cfg.svm_lambda, epochs=cfg.svm_epochs,
            lr=cfg.svm_lr, batch_size=cfg.batch_size, seed=cfg.seed,
        )
        return LinearSVM(classes=classes, seed=cfg.seed, arch="svm", W=W, b=b, scaler=scaler)
    if arch == "nn":
        W1, b1, W2, b2 = fit_shallow_net(
            Z, y, n_classes, hidden=cfg.hidden, epochs=cfg.nn_epochs,
            lr=cfg.nn_lr, batch_size=cfg.batch_size, seed=cfg.seed,
        )
        return ShallowNet(classes=classes, seed=cfg.seed, arch="nn",
                          W1=W1, b1=b1, W2=W2, b2=b2, scaler=scaler)
    raise ValueError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")


def accuracy(model: Classifier, X, labels) -> float:
    if len(labels) == 0:
        return float("nan")
    pred = model.predict_labels(np.asarray(X, dtype=float))
    return float(np.mean([p == t for p, t in zip(pred, labels)]))


def train_multiclass(X, labels, cfg: TrainConfig | None = None, arch: str = "nn",
                     holdout: tuple | None = None) -> Classifier:
    """Top-1 classifier over every label present in ``labels``.

    ``holdout`` is an optional ``(X, labels)`` pair whose accuracy is stored
    in ``model.metrics``.
    """
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=float)
    classes, y = label_indices(list(labels))
    if len(classes) < 2:
        raise TrainingError("multiclass training needs at least 2 classes")
    counts = np.bincount(y, minlength=len(classes))
    if counts.min() < 2:
        thin = [str(classes[i]) for i in np.nonzero(counts < 2)[0]]
        raise TrainingError(f"classes with fewer than 2 samples: {', '.join(thin)}")
    if np.all(np.ptp(X, axis=0) == 0):
        raise TrainingError("all training samples are identical; classes cannot be separated")
    model = _fit(arch, X, y, classes, cfg)
    model.metrics["train_accuracy"] = accuracy(model, X, list(labels))
    if holdout is not None:
        model.metrics["holdout_accuracy"] = accuracy(model, *holdout)
    return model


def oversample_target(X_target: np.ndarray, n_outlier: int, rng: np.random.Generator) -> np.ndarray:
    """Repeat target rows (drawn with replacement) until they match the outlier count."""
    extra = n_outlier - len(X_target)
    if extra <= 0:
        return X_target
    picks = rng.integers(0, len(X_target), size=extra)
    return np.vstack([X_target, X_target[picks]])


def train_target_vs_outlier(target, X, labels, cfg: TrainConfig | None = None,
                            arch: str = "rf") -> Classifier:
    """Binary model for one principal; every other label forms the outlier class."""
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    is_target = np.array([lab == target for lab in labels])
    if not is_target.any():
        raise TrainingError(f"target {target!r} has no samples")
    if is_target.all():
        raise TrainingError("target-vs-outlier training needs at least one other principal")
    rng = np.random.default_rng(cfg.seed)
    Xt = oversample_target(X[is_target], int((~is_target).sum()), rng)
    Xo = X[~is_target]
    Xb = np.vstack([Xo, Xt])
    y = np.r_[np.zeros(len(Xo), dtype=int), np.ones(len(Xt), dtype=int)]
    model = _fit(arch, Xb, y, [OUTLIER, TARGET], cfg)
    model.metrics.update(
        target=str(target), n_target_raw=int(is_target.sum()),
        n_target=len(Xt), n_outlier=len(Xo),
    )
    return model


def train_substitute(seed_dataset, cfg: TrainConfig | None = None, arch: str = "nn") -> Classifier:
    """Adversary's binary YES/NO model G, trained on a QuickStart seed dataset."""
    cfg = cfg or TrainConfig()
    Y = np.asarray(seed_dataset.yes_samples, dtype=float)
    N = np.asarray(seed_dataset.no_samples, dtype=float)
    if len(Y) == 0 or len(N) == 0:
        raise TrainingError("seed dataset needs both YES and NO samples")
    if len(Y) != len(N):
        raise TrainingError(f"seed dataset is unbalanced ({len(Y)} YES vs {len(N)} NO)")
    if {r.tobytes() for r in Y} & {r.tobytes() for r in N}:
        warnings.warn("identical samples carry both YES and NO labels", DegenerateSeedWarning)
    X = np.vstack([N, Y])
    y = np.r_[np.zeros(len(N), dtype=int), np.ones(len(Y), dtype=int)]
    model = _fit(arch, X, y, [NO, YES], cfg)
    model.metrics["train_accuracy"] = accuracy(model, X, [NO] * len(N) + [YES] * len(Y))
    return model


def predict(model: Classifier, x) -> tuple[object, float | None]:
    """Label and score for a single vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("predict expects a single feature vector")
    idx, score = model.predict_batch(x)
    return model.classes[int(idx[0])], (None if score is None else float(score[0]))


def dump_model(model: Classifier, cfg: TrainConfig) -> str:
    """JSON description; parameters are regenerated from seed and data, not stored."""
    return json.dumps({**model.describe(), "hyperparameters": cfg.to_dict()}, sort_keys=True)

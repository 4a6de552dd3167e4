"""Linear one-vs-rest SVM trained by mini-batch subgradient descent on the hinge loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, Standardizer


@dataclass
class LinearSVM(Classifier):
    W: np.ndarray = None  # (n_outputs, k); one row when binary
    b: np.ndarray = None
    scaler: Standardizer | None = None

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    def margins(self, X: np.ndarray) -> np.ndarray:
        Z = self.scaler(X) if self.scaler is not None else X
        return Z @ self.W.T + self.b

    def class_scores(self, X):
        M = self.margins(X)
        if M.shape[1] == 1:
            # binary: the positive class is index 1, chosen only when the margin is > 0
            return np.hstack([-M, M])
        return M


def fit_linear_svm(X, y, n_classes, *, lam=1e-3, epochs=200, lr=0.01, batch_size=32, seed=0):
    """Return (W, b) in standardized coordinates."""
    rng = np.random.default_rng(seed)
    n, k = X.shape
    n_out = 1 if n_classes == 2 else n_classes
    if n_out == 1:
        T = np.where(y == 1, 1.0, -1.0)[:, None]
    else:
        T = -np.ones((n, n_out))
        T[np.arange(n), y] = 1.0
    W = np.zeros((n_out, k))
    b = np.zeros(n_out)
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = perm[start:start + batch_size]
            Xb, Tb = X[rows], T[rows]
            active = (Tb * (Xb @ W.T + b)) < 1.0
            G = -(active * Tb)  # d hinge / d margin
            gW = G.T @ Xb / len(rows) + lam * W
            gb = G.mean(axis=0)
            W -= lr * gW
            b -= lr * gb
    return W, b

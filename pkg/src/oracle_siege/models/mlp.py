"""One-hidden-layer ReLU network with a softmax head."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, Standardizer


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


@dataclass
class ShallowNet(Classifier):
    W1: np.ndarray = None
    b1: np.ndarray = None
    W2: np.ndarray = None
    b2: np.ndarray = None
    scaler: Standardizer | None = None

    @property
    def n_features(self) -> int:
        return self.W1.shape[0]

    def logits(self, X: np.ndarray) -> np.ndarray:
        Z = self.scaler(X) if self.scaler is not None else X
        H = np.maximum(Z @ self.W1 + self.b1, 0.0)
        return H @ self.W2 + self.b2

    def class_scores(self, X):
        return softmax(self.logits(X))


def fit_shallow_net(X, y, n_classes, *, hidden=32, epochs=200, lr=0.01, batch_size=32, seed=0):
    """Mini-batch training with Adam on the cross-entropy loss; returns the four parameter arrays."""
    rng = np.random.default_rng(seed)
    n, k = X.shape
    W1 = rng.normal(0.0, np.sqrt(2.0 / k), size=(k, hidden))
    b1 = np.zeros(hidden)
    W2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, n_classes))
    b2 = np.zeros(n_classes)
    params = [W1, b1, W2, b2]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0
    t = 0
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = perm[start:start + batch_size]
            Xb, Yb = X[rows], Y[rows]
            Hpre = Xb @ W1 + b1
            H = np.maximum(Hpre, 0.0)
            P = softmax(H @ W2 + b2)
            dZ = (P - Yb) / len(rows)
            dW2 = H.T @ dZ
            db2 = dZ.sum(axis=0)
            dH = (dZ @ W2.T) * (Hpre > 0)
            dW1 = Xb.T @ dH
            db1 = dH.sum(axis=0)
            t += 1
            for p, g, mi, vi in zip(params, (dW1, db1, dW2, db2), m, v):
                mi *= beta1
                mi += (1 - beta1) * g
                vi *= beta2
                vi += (1 - beta2) * g * g
                p -= lr * (mi / (1 - beta1**t)) / (np.sqrt(vi / (1 - beta2**t)) + eps)
    return W1, b1, W2, b2

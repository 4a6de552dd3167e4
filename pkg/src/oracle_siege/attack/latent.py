"""Linear autoencoder (principal components) used as the latent perturbation space."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class LatentCodec:
    mean: np.ndarray
    basis: np.ndarray  # (k, m), orthonormal columns
    eigenvalues: np.ndarray  # all k covariance eigenvalues, descending
    seed: int = 0

    @property
    def m(self) -> int:
        return self.basis.shape[1]

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    def encode(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.k:
            raise ValueError(f"codec expects {self.k} features, got {X.shape[-1]}")
        return (X - self.mean) @ self.basis

    def decode(self, L) -> np.ndarray:
        L = np.asarray(L, dtype=float)
        if L.shape[-1] != self.m:
            raise ValueError(f"codec expects {self.m} latent dims, got {L.shape[-1]}")
        return self.mean + L @ self.basis.T

    def edit(self, x, latent) -> np.ndarray:
        """Move ``x`` to the given latent coordinates while keeping its off-subspace residual."""
        x = np.asarray(x, dtype=float)
        return x + (np.asarray(latent, dtype=float) - self.encode(x)) @ self.basis.T

    def reconstruction_error(self, X) -> float:
        """Mean squared reconstruction norm per sample."""
        X = np.asarray(X, dtype=float)
        R = X - self.decode(self.encode(X))
        return float(np.mean(np.sum(R * R, axis=1)))


def default_latent_dim(k: int) -> int:
    return max(1, math.ceil(k / 10))


def fit_latent_codec(data, m: int | None = None, seed: int = 0) -> LatentCodec:
    X = np.asarray(data, dtype=float)
    n, k = X.shape
    m = default_latent_dim(k) if m is None else int(m)
    if not 1 <= m <= k:
        raise ValueError(f"latent dimension must be within 1..{k}, got {m}")
    if n <= m:
        raise ValueError(f"need more than {m} samples to fit a rank-{m} codec, got {n}")
    mean = X.mean(axis=0)
    _, s, Vt = np.linalg.svd(X - mean, full_matrices=True)
    eig = np.zeros(k)
    eig[: len(s)] = s**2 / n
    basis = Vt[:m].T.copy()
    # sign convention: largest-magnitude entry of each column is positive
    pivot = np.argmax(np.abs(basis), axis=0)
    basis *= np.sign(basis[pivot, np.arange(m)])
    return LatentCodec(mean, basis, eig, seed)

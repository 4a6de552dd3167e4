"""Synthetic principal populations and enrollment/hold-out splits."""

from __future__ import annotations

import math

import numpy as np


class InfeasiblePacking(ValueError):
    pass


def _basis(k: int, rank: int, seed: int) -> np.ndarray:
    if rank >= k:
        return np.eye(k)
    Q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(k, rank)))
    return Q


def default_spread(separation: float, within_std: float, rank: int) -> float:
    # uniform box whose expected pairwise center distance is twice the minimum
    return 2.0 * separation * within_std / math.sqrt(2.0 * rank / 3.0)


def generate_synthetic_principals(n: int, k: int, samples_each: int, separation: float = 10.0,
                                  within_std: float = 1.0, seed: int = 0, *,
                                  center_rank: int | None = None, spread: float | None = None,
                                  basis_seed: int | None = None, max_tries: int = 2000,
                                  prefix: str = "u") -> dict[str, np.ndarray]:
    """``n`` Gaussian clusters with pairwise center distance >= ``separation * within_std``.

    Centers are drawn uniformly from a box of half-width ``spread`` inside a
    ``center_rank``-dimensional subspace (all of R^k by default). Without an
    explicit ``spread`` the box grows whenever placement jams; with one, a
    jam raises :class:`InfeasiblePacking`. The
    subspace depends on ``basis_seed`` only, so populations drawn with
    different ``seed`` but the same ``basis_seed`` share their structure.
    """
    if n < 2:
        raise ValueError("need at least 2 principals")
    if separation <= 0 or within_std <= 0:
        raise ValueError("separation and within_std must be positive")
    if samples_each < 1 or k < 1:
        raise ValueError("k and samples_each must be positive")
    rank = k if center_rank is None else min(int(center_rank), k)
    B = _basis(k, rank, seed if basis_seed is None else basis_seed)
    half = default_spread(separation, within_std, rank) if spread is None else spread
    rng = np.random.default_rng(seed)
    min_dist = separation * within_std
    coords: list[np.ndarray] = []
    tries = 0
    while len(coords) < n:
        c = rng.uniform(-half, half, size=rank)
        if all(np.linalg.norm(c - d) >= min_dist for d in coords):
            coords.append(c)
            tries = 0
            continue
        tries += 1
        if tries > max_tries and spread is None:
            # the default box jammed (low rank, many principals): widen it, keep placed centers
            half *= 1.25
            tries = 0
        elif tries > max_tries:
            raise InfeasiblePacking(
                f"could not place {n} centers {min_dist:g} apart in a box of half-width {half:g}; "
                "use a larger spread"
            )
    width = len(str(n - 1))
    out = {}
    for i, c in enumerate(coords):
        center = B @ c
        out[f"{prefix}{i:0{width}d}"] = center + rng.normal(0.0, within_std, size=(samples_each, k))
    return out


def split_holdout(data: dict[str, np.ndarray], holdout_fraction: float = 1 / 3):
    """First part of every principal's samples enrolls, the rest is held out."""
    enroll, hold = {}, {}
    for name, X in data.items():
        n_hold = int(round(len(X) * holdout_fraction))
        n_hold = min(max(n_hold, 1 if len(X) > 1 else 0), len(X) - 1)
        enroll[name] = X[: len(X) - n_hold]
        hold[name] = X[len(X) - n_hold:]
    return enroll, hold

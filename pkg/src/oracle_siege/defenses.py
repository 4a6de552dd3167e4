"""Training-set augmentation defenses: a uniform-noise ``other`` class and a generative ``fake`` class."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .attack.latent import LatentCodec

NONE, RANDOM, ALL = "none", "random", "all"
OTHER_LABEL, FAKE_LABEL = "other", "fake"


@dataclass(frozen=True, eq=False)
class DefenseConfig:
    mode: str = NONE
    samples_per_class: int | None = None  # None -> largest per-principal training count
    codec: LatentCodec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (NONE, RANDOM, ALL):
            raise ValueError(f"unknown defense mode {self.mode!r}")
        if self.mode == ALL and self.codec is None:
            raise ValueError("the fake-class defense needs a latent codec")
        if self.samples_per_class is not None and self.samples_per_class <= 0:
            raise ValueError("samples_per_class must be positive")


def inject_other_class(X, labels, bounds, count: int, seed: int = 0):
    """Append ``count`` samples drawn uniformly inside the feature domain, labelled ``other``."""
    if count <= 0:
        raise ValueError("count must be positive")
    if bounds is None:
        raise ValueError("the noise defense needs finite feature-domain bounds")
    bounds = np.asarray(bounds, dtype=float)
    if not np.all(np.isfinite(bounds)):
        raise ValueError("the noise defense needs finite feature-domain bounds")
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    noise = rng.uniform(bounds[:, 0], bounds[:, 1], size=(count, X.shape[1]))
    return np.vstack([X, noise]), list(labels) + [OTHER_LABEL] * count


def inject_fake_class(X, labels, codec: LatentCodec, count: int, seed: int = 0):
    """Append decoded samples from the latent box spanned by one encoding per principal."""
    if count <= 0:
        raise ValueError("count must be positive")
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    if codec.k != X.shape[1]:
        raise ValueError(f"codec expects {codec.k} features, data has {X.shape[1]}")
    rng = np.random.default_rng(seed)
    names = [n for n in dict.fromkeys(labels) if n not in (OTHER_LABEL, FAKE_LABEL)]
    if not names:
        raise ValueError("no principal samples to encode")
    picks = []
    for name in names:
        rows = [i for i, lab in enumerate(labels) if lab == name]
        picks.append(rows[int(rng.integers(len(rows)))])
    Z = codec.encode(X[picks])
    lo, hi = Z.min(axis=0), Z.max(axis=0)
    fakes = codec.decode(rng.uniform(lo, hi, size=(count, codec.m)))
    return np.vstack([X, fakes]), labels + [FAKE_LABEL] * count


def augment(X, labels, bounds, cfg: DefenseConfig):
    if cfg.mode == NONE:
        return np.asarray(X, dtype=float), list(labels)
    count = cfg.samples_per_class or max(Counter(labels).values())
    X, labels = inject_other_class(X, labels, bounds, count, cfg.seed)
    if cfg.mode == ALL:
        X, labels = inject_fake_class(X, labels, cfg.codec, count, cfg.seed + 1)
    return X, labels

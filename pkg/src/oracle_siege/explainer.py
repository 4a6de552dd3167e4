"""Model-agnostic local explanations over quantile-binned features.

An explanation is a ranked list of ``(feature, weight, [lo, hi])`` rules:
``weight`` is how much the surrogate's score toward the target class can
rise by moving the feature into the bin ``[lo, hi]``, the bin with the
largest coefficient toward that class.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

YES, NO = "YES", "NO"


@dataclass(frozen=True)
class Rule:
    feature: int
    weight: float
    lo: float
    hi: float

    def to_json(self) -> dict:
        return {"feature": self.feature, "weight": self.weight, "lo": self.lo, "hi": self.hi}


@dataclass
class Explanation:
    rules: list[Rule]
    target_class: str
    local_fit_score: float
    degenerate: bool = False

    def top(self, r: int) -> list[Rule]:
        return self.rules[:r]

    def to_json(self) -> str:
        return json.dumps([rule.to_json() for rule in self.rules])


@dataclass(frozen=True, eq=False)
class Discretizer:
    boundaries: list[np.ndarray]  # per feature, strictly increasing interior cut points
    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    @property
    def k(self) -> int:
        return len(self.boundaries)

    def n_bins(self, j: int) -> int:
        return len(self.boundaries[j]) + 1

    def interval(self, j: int, b: int) -> tuple[float, float]:
        cuts = self.boundaries[j]
        lo = self.minimum[j] if b == 0 else cuts[b - 1]
        hi = self.maximum[j] if b == len(cuts) else cuts[b]
        return float(lo), float(hi)

    def intervals(self, j: int) -> list[tuple[float, float]]:
        return [self.interval(j, b) for b in range(self.n_bins(j))]

    @cached_property
    def bin_counts(self) -> np.ndarray:
        return np.array([len(c) + 1 for c in self.boundaries])

    @cached_property
    def edges(self) -> np.ndarray:
        """(k, max_bins + 1) table of bin edges, padded past each feature's last bin."""
        out = np.full((self.k, int(self.bin_counts.max()) + 1), np.inf)
        for j, cuts in enumerate(self.boundaries):
            out[j, : len(cuts) + 2] = np.r_[self.minimum[j], cuts, self.maximum[j]]
        return out

    def bin_of(self, X) -> np.ndarray:
        """Bin index per feature; a value equal to a cut point falls in the lower bin."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cuts = self.edges[:, 1:-1]
        inner = np.arange(cuts.shape[1]) < (self.bin_counts - 1)[:, None]
        return ((X[:, :, None] > cuts[None]) & inner[None]).sum(axis=2)

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


def fit_discretizer(reference, bins_per_feature: int = 4) -> Discretizer:
    """Quantile bins with linear interpolation between order statistics."""
    R = np.atleast_2d(np.asarray(reference, dtype=float))
    if R.size == 0 or len(R) == 0:
        raise ValueError("discretizer needs a non-empty reference set")
    if bins_per_feature < 2:
        raise ValueError("need at least 2 bins per feature")
    qs = np.arange(1, bins_per_feature) / bins_per_feature
    lo, hi = R.min(axis=0), R.max(axis=0)
    boundaries = []
    for j in range(R.shape[1]):
        if hi[j] == lo[j]:
            boundaries.append(np.empty(0))
            continue
        cuts = np.unique(np.quantile(R[:, j], qs, method="linear"))
        boundaries.append(cuts[(cuts > lo[j]) & (cuts < hi[j])])
    scale = R.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return Discretizer(boundaries, lo, hi, R.mean(axis=0), scale)


def proximity_weights(distances, kernel_width: float) -> np.ndarray:
    d = np.asarray(distances, dtype=float)
    return np.exp(-(d * d) / (kernel_width * kernel_width))


def weighted_ridge(A: np.ndarray, y: np.ndarray, w: np.ndarray, alpha: float = 1e-3):
    """Ridge fit with an unpenalized intercept; returns (coef, intercept, weighted R^2)."""
    sw = w / w.sum()
    a_mean = sw @ A
    y_mean = sw @ y
    Ac = A - a_mean
    yc = y - y_mean
    B = Ac * np.sqrt(w)[:, None]
    n, p = B.shape
    rhs = np.sqrt(w) * yc
    if n < p:  # dual form: an n x n system instead of p x p
        K = B @ B.T
        K.flat[:: n + 1] += alpha
        coef = B.T @ np.linalg.solve(K, rhs)
    else:
        K = B.T @ B
        K.flat[:: p + 1] += alpha
        coef = np.linalg.solve(K, B.T @ rhs)
    resid = yc - Ac @ coef
    ss_tot = float(w @ (yc * yc))
    r2 = 0.0 if ss_tot <= 0 else max(0.0, 1.0 - float(w @ (resid * resid)) / ss_tot)
    return coef, float(y_mean - a_mean @ coef), min(r2, 1.0)


def _target_response(model, Z: np.ndarray, target_class: str):
    """Surrogate regression target and hard 0/1 decisions toward ``target_class``."""
    labels = model.predict_labels(Z)
    hard = np.array([lab == target_class for lab in labels], dtype=float)
    score = model.score_for(Z, target_class)
    return (hard if score is None else np.asarray(score, dtype=float)), hard


def sample_neighbors(x, disc: Discretizer, n: int, rng: np.random.Generator, p_resample=0.5):
    """Neighbors of ``x``: each feature's bin is redrawn with probability ``p_resample``."""
    k = disc.k
    Z = np.tile(np.asarray(x, dtype=float), (n, 1))
    flip = rng.random((n, k)) < p_resample
    flip[0] = False  # row 0 is x itself
    b = np.minimum((rng.random((n, k)) * disc.bin_counts).astype(int), disc.bin_counts - 1)
    cols = np.broadcast_to(np.arange(k), (n, k))
    lo, hi = disc.edges[cols, b], disc.edges[cols, b + 1]
    fresh = lo + rng.random((n, k)) * (hi - lo)
    return np.where(flip, fresh, Z)


def explain(model, x, target_class: str = YES, disc: Discretizer | None = None,
            n_perturb: int = 500, kernel_width: float | None = None, seed: int = 0,
            ridge_alpha: float = 1e-3) -> Explanation:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ValueError(f"model expects {model.n_features} features")
    if disc is None or disc.k != x.shape[0]:
        raise ValueError("a discretizer fitted on the same feature space is required")
    k = x.shape[0]
    if kernel_width is None:
        kernel_width = 0.75 * math.sqrt(k)
    if kernel_width <= 0:
        raise ValueError("kernel_width must be positive")
    if n_perturb < 10 * k:
        warnings.warn(f"n_perturb={n_perturb} is below 10*k={10 * k}; the local fit may be noisy")
    rng = np.random.default_rng(seed)
    Z = sample_neighbors(x, disc, n_perturb, rng)
    response, hard = _target_response(model, Z, target_class)

    if np.all(hard == hard[0]):
        rules = [Rule(j, 0.0, *disc.interval(j, int(disc.bin_of(x)[0, j]))) for j in range(k)]
        return Explanation(rules, target_class, 0.0, degenerate=True)

    bins = disc.bin_of(Z)
    offsets = np.r_[0, np.cumsum([disc.n_bins(j) for j in range(k)])]
    A = np.zeros((n_perturb, offsets[-1]))
    A[np.arange(n_perturb)[:, None], offsets[:-1] + bins] = 1.0
    dist = np.linalg.norm(disc.standardize(Z) - disc.standardize(x), axis=1)
    w = proximity_weights(dist, kernel_width)
    coef, _, r2 = weighted_ridge(A, response, w, ridge_alpha)

    rules = []
    for j in range(k):
        c = coef[offsets[j]:offsets[j + 1]]
        best = int(np.argmax(c))
        rules.append(Rule(j, float(c[best] - c.min()), *disc.interval(j, best)))
    rules.sort(key=lambda r: (-r.weight, r.feature))
    return Explanation(rules, target_class, r2)


def render_rules(e: Explanation, names: list[str] | None = None, top: int | None = None,
                 disc: Discretizer | None = None) -> str:
    """Plain-text rule report, one line per rule in explanation order.

    With ``disc`` given, rules on a feature's lowest or highest bin are
    written as one-sided inequalities (``f_49 <= -8.16``).
    """
    rules = e.rules if top is None else e.rules[:top]
    head = f"explanation toward {e.target_class} (local fit R^2={e.local_fit_score:.3f})"
    if e.degenerate:
        head += " [degenerate: model gave one label to every neighbor]"
    if top is not None and len(e.rules) > top:
        head += f" [top {top} of {len(e.rules)} rules]"
    lines = [head]
    for r in rules:
        name = names[r.feature] if names else f"f_{r.feature}"
        lo, hi = float(r.lo), float(r.hi)
        cond = f"in ({lo!r}, {hi!r}]"
        if disc is not None and disc.n_bins(r.feature) > 1:
            if lo <= disc.minimum[r.feature]:
                cond = f"<= {hi:.2f}"
            elif hi >= disc.maximum[r.feature]:
                cond = f"> {lo:.2f}"
        lines.append(f"{name} {cond}  weight={r.weight:+.3f} toward {e.target_class}")
    return "\n".join(lines)

"""Authentication systems, the binary oracle boundary, and query accounting."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .models import (
    ConstantClassifier, TrainConfig, TARGET, train_multiclass, train_target_vs_outlier,
)

MULTICLASS, PER_PRINCIPAL = "multiclass", "per-principal"
REJECT_LABELS = ("other", "fake")


class Decision(str, Enum):
    YES = "YES"
    NO = "NO"

    def __bool__(self):
        return self is Decision.YES


class AuthError(ValueError):
    """Invalid enrollment or authentication input."""


class BudgetExhausted(RuntimeError):
    """The oracle handle has no queries left."""

    def __init__(self, budget: int):
        super().__init__(f"query budget of {budget} exhausted")
        self.budget = budget


def as_feature_matrix(samples, k: int | None = None) -> np.ndarray:
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise AuthError("expected a non-empty list of feature vectors")
    if k is not None and X.shape[1] != k:
        raise AuthError(f"dimension mismatch: expected {k} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise AuthError("feature vectors must be finite (no NaN/Inf)")
    return X


@dataclass(frozen=True, eq=False)
class Principal:
    username: str
    samples: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class AuthSystem:
    """The (U, D, k, F) tuple plus stream handling.

    Instances are immutable: ``register`` returns a retrained copy. ``defense``
    is a :class:`oracle_siege.defenses.DefenseConfig` applied at training time.
    """

    k: int
    bounds: np.ndarray | None = field(default=None, repr=False)  # (k, 2) low/high
    backend: str = "nn"
    mode: str = MULTICLASS
    stream_size: int = 1
    variance_check: float | None = None
    train_config: TrainConfig = field(default_factory=TrainConfig)
    defense: object = None
    principals: tuple[Principal, ...] = ()
    models: Mapping = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.k < 1:
            raise AuthError("dimensionality must be positive")
        if self.stream_size < 1:
            raise AuthError("stream_size must be >= 1")
        if self.mode not in (MULTICLASS, PER_PRINCIPAL):
            raise AuthError(f"unknown oracle mode {self.mode!r}")
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float)
            if b.shape != (self.k, 2) or np.any(b[:, 0] > b[:, 1]):
                raise AuthError("bounds must be a (k, 2) array of [low, high] rows")
            object.__setattr__(self, "bounds", b)

    @property
    def usernames(self) -> list[str]:
        return [p.username for p in self.principals]

    def principal(self, username: str) -> Principal | None:
        for p in self.principals:
            if p.username == username:
                return p
        return None

    # -- enrollment -------------------------------------------------------

    def with_principals(self, enrollment: Mapping[str, Sequence]) -> "AuthSystem":
        """Register many principals at once and train a single backend."""
        principals = list(self.principals)
        seen = set(self.usernames)
        for name, samples in enrollment.items():
            name = str(name)
            if name in seen:
                raise AuthError(f"duplicate username {name!r}")
            if name in REJECT_LABELS:
                raise AuthError(f"username {name!r} is reserved for defense classes")
            seen.add(name)
            principals.append(Principal(name, as_feature_matrix(samples, self.k)))
        return self._trained(tuple(principals))

    def _trained(self, principals: tuple[Principal, ...]) -> "AuthSystem":
        X = np.vstack([p.samples for p in principals])
        labels = [p.username for p in principals for _ in range(len(p.samples))]
        if self.defense is not None:
            from .defenses import augment

            X, labels = augment(X, labels, self.bounds, self.defense)
        models: dict = {}
        lone = len(set(labels)) == 1
        if self.mode == MULTICLASS:
            if lone:
                models[None] = ConstantClassifier(classes=[principals[0].username], k=self.k)
            else:
                models[None] = train_multiclass(X, labels, self.train_config, self.backend)
        else:
            for i, p in enumerate(principals):
                if lone:
                    models[p.username] = ConstantClassifier(classes=[TARGET], k=self.k)
                    continue
                cfg = self.train_config.replace(seed=self.train_config.seed + i)
                models[p.username] = train_target_vs_outlier(p.username, X, labels, cfg, self.backend)
        return replace(self, principals=principals, models=models)

    def retrained(self) -> "AuthSystem":
        """Same principals, fresh backend (e.g. after changing defense or config)."""
        if not self.principals:
            return replace(self, models={})
        return self._trained(self.principals)

    # -- decisions --------------------------------------------------------

    def classify(self, claimed: str, stream: np.ndarray) -> tuple[np.ndarray, list]:
        """Per-sample match flags for ``claimed`` and the per-sample scores."""
        if self.mode == MULTICLASS:
            model = self.models[None]
            idx, score = model.predict_batch(stream)
            matches = np.array([model.classes[i] == claimed for i in idx])
        else:
            model = self.models[claimed]
            idx, score = model.predict_batch(stream)
            matches = np.array([model.classes[i] == TARGET for i in idx])
        return matches, (None if score is None else list(score))

    def decide(self, claimed: str, stream) -> tuple[Decision, float | None, str | None]:
        """Decision, internal confidence and an optional audit flag."""
        stream = as_feature_matrix(stream, self.k)
        if len(stream) != self.stream_size:
            raise AuthError(f"stream must hold {self.stream_size} samples, got {len(stream)}")
        if claimed not in self.usernames:
            return Decision.NO, None, "unknown_username"
        if self.variance_check is not None and self.stream_size > 1:
            if float(stream.var(axis=0).mean()) < self.variance_check:
                return Decision.NO, None, "low_variance"
        matches, scores = self.classify(claimed, stream)
        confidence = None if scores is None else float(np.mean(scores))
        # strict majority; an even split is a NO
        decision = Decision.YES if matches.sum() * 2 > len(matches) else Decision.NO
        return decision, confidence, None


def register(system: AuthSystem, username: str, samples) -> AuthSystem:
    """Add one principal and retrain the backend."""
    return system.with_principals({username: samples})


def enrollment_self_test(system: AuthSystem, holdout: Mapping[str, Sequence]) -> dict[str, float]:
    """Per-principal fraction of hold-out samples accepted for their own username."""
    result = {}
    for name, samples in holdout.items():
        X = as_feature_matrix(samples, system.k)
        matches, _ = system.classify(name, X)
        result[name] = float(matches.mean())
    return result


def stream_digest(stream: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(stream, dtype=float).tobytes()).hexdigest()[:16]


@dataclass
class AuditEntry:
    query_index: int
    claim: str
    digest: str
    decision: Decision
    confidence: float | None
    flag: str | None = None

    def to_json(self) -> dict:
        return {
            "query_index": self.query_index, "claim": self.claim,
            "decision": self.decision.value, "confidence": self.confidence,
            "digest": self.digest, "flag": self.flag,
        }


class OracleHandle:
    """Harness-side handle: one per attack run, single writer.

    Keeps the audit trail (including internal confidence) that the adversary
    never sees. Use :meth:`adversary_view` to hand the oracle to attack code.
    """

    def __init__(self, system: AuthSystem, budget: int = 200):
        if budget < 1:
            raise AuthError("query budget must be positive")
        self.system = system
        self.query_budget = int(budget)
        self.query_count = 0
        self.audit_log: list[AuditEntry] = []

    @property
    def remaining(self) -> int:
        return self.query_budget - self.query_count

    def authenticate(self, claimed: str, stream) -> Decision:
        if self.query_count >= self.query_budget:
            raise BudgetExhausted(self.query_budget)
        stream = as_feature_matrix(stream, self.system.k)
        decision, confidence, flag = self.system.decide(claimed, stream)
        self.audit_log.append(
            AuditEntry(self.query_count, str(claimed), stream_digest(stream), decision, confidence, flag)
        )
        self.query_count += 1
        return decision

    def adversary_view(self) -> "AdversaryOracle":
        return AdversaryOracle(self)

    def export_audit(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.audit_log:
                fh.write(json.dumps(entry.to_json(), sort_keys=True) + "\n")


class AdversaryOracle:
    """What an attacker holds: submit a (claim, stream) pair, get YES or NO.

    Exposes the stream size, the remaining budget and the public feature
    domain, and nothing else about the system behind it.
    """

    __slots__ = ("_authenticate", "_remaining", "stream_size", "k", "bounds")

    def __init__(self, handle: OracleHandle):
        system = handle.system
        self._authenticate = handle.authenticate
        self._remaining = lambda: handle.remaining
        self.stream_size = system.stream_size
        self.k = system.k
        self.bounds = None if system.bounds is None else system.bounds.copy()

    @property
    def remaining(self) -> int:
        return self._remaining()

    def query(self, claim: str, stream) -> Decision:
        decision = self._authenticate(claim, stream)
        return Decision.YES if decision is Decision.YES else Decision.NO


def default_bounds(X: np.ndarray, margin: float = 0.25) -> np.ndarray:
    """Per-feature [min, max] of the data widened by ``margin`` of the range."""
    lo, hi = X.min(axis=0), X.max(axis=0)
    pad = np.maximum(hi - lo, 1e-9) * margin
    return np.column_stack([lo - pad, hi + pad])


# -- enrollment CSV ---------------------------------------------------------

def read_enrollment_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Rows of ``username, f_0, ..., f_{k-1}`` with a mandatory header."""
    grouped: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise AuthError(f"{path}: empty file, header row required") from None
        k = len(header) - 1
        if k < 1 or header[0].strip().lower() != "username":
            raise AuthError(f"{path}: header must start with 'username' followed by feature columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != k + 1:
                raise AuthError(f"{path}:{lineno}: expected {k + 1} columns, got {len(row)}")
            try:
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise AuthError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in values):
                raise AuthError(f"{path}:{lineno}: non-finite feature")
            grouped.setdefault(row[0], []).append(values)
    return {name: np.array(rows) for name, rows in grouped.items()}


def write_enrollment_csv(path: str | Path, data: Mapping[str, np.ndarray]) -> None:
    k = next(iter(data.values())).shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["username"] + [f"f_{j}" for j in range(k)])
        for name, X in data.items():
            for row in X:
                w.writerow([name] + [repr(float(v)) for v in row])


def iter_streams(samples: np.ndarray, m: int) -> Iterable[np.ndarray]:
    """Consecutive m-sample windows, wrapping around when samples run short."""
    n = len(samples)
    for start in range(0, n, m):
        idx = [(start + j) % n for j in range(m)]
        yield samples[idx]

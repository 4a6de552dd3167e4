"""The adversary: Perturb, QuickStart, LIME-Sampler and the naive baselines.

Everything here talks to the system only through an
:class:`~oracle_siege.auth.AdversaryOracle`, i.e. YES/NO answers plus the
public stream size and feature domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..auth import AdversaryOracle, BudgetExhausted, Decision
from ..explainer import NO, Discretizer, Explanation, explain
from .spaces import RawSpace


class AttackError(RuntimeError):
    pass


class PartialDatasetError(AttackError):
    """Budget ran out before QuickStart balanced its classes."""

    def __init__(self, message: str, partial: "SeedDataset"):
        super().__init__(message)
        self.partial = partial


class DistortionWindowError(AttackError):
    """Distortion escalated past ``upsilon_max`` without a single NO."""


@dataclass(frozen=True)
class QuickStartParams:
    beta: float = 0.25
    alpha: float = 8.0
    sigma: int = 25
    upsilon_max: int = 30

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.alpha < self.beta:
            raise ValueError("alpha must be >= beta")
        if self.sigma < 1 or self.upsilon_max < 1:
            raise ValueError("sigma and upsilon_max must be positive")


def distortion(upsilon: int, params: QuickStartParams) -> float:
    """Noise scale for escalation level ``upsilon``: doubles from beta, capped at alpha."""
    if upsilon < 1:
        raise ValueError("upsilon must be >= 1")
    return min(params.beta * 2.0 ** (upsilon - 1), params.alpha)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def perturb(x, upsilon: int, params: QuickStartParams, seed=0, bounds=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    z = x + _rng(seed).normal(0.0, distortion(upsilon, params), size=x.shape)
    if bounds is not None:
        b = np.asarray(bounds, dtype=float)
        z = np.clip(z, b[:, 0], b[:, 1])
    return z


@dataclass
class SeedDataset:
    yes_samples: list
    no_samples: list
    query_cost: int = 0
    upsilon: int = 0  # escalation level reached in loop 2

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.yes_samples), np.asarray(self.no_samples)


@dataclass
class HistoryEntry:
    vector: np.ndarray
    claim: str
    decision: Decision
    note: str = ""


@dataclass
class AttackState:
    ground_truth: np.ndarray  # raw samples the adversary owns
    seed_dataset: SeedDataset
    substitute: object  # classifier G over working coordinates
    known_usernames: list
    r: int
    seed: int = 0
    params: QuickStartParams = field(default_factory=QuickStartParams)
    history: list = field(default_factory=list)


@dataclass
class AttackOutcome:
    success: bool
    accepted_identity: str | None
    queries_spent: int
    final_vector: np.ndarray | None = None
    trace: list = field(default_factory=list)
    # working-space point, anchor sample and explanation behind the final query
    final_point: np.ndarray | None = None
    final_anchor: np.ndarray | None = None
    final_explanation: Explanation | None = None
    final_discretizer: Discretizer | None = None
    error: str | None = None


def default_r(k: int) -> int:
    return max(1, math.ceil(0.1 * k))


class _Asker:
    """Counts queries and keeps the trace for one attack run."""

    def __init__(self, oracle: AdversaryOracle):
        self.oracle = oracle
        self.count = 0
        self.trace: list[dict] = []

    def __call__(self, claim, stream, phase, upsilon=None, features=None) -> Decision:
        decision = self.oracle.query(claim, np.atleast_2d(stream))
        self.trace.append({
            "iteration": self.count, "phase": phase, "claim": claim,
            "decision": decision.value, "upsilon": upsilon,
            "top_r_features": features,
        })
        self.count += 1
        return decision


def _stream(make_one, m: int) -> np.ndarray:
    return np.vstack([make_one() for _ in range(m)])


def quickstart(a_gt, params: QuickStartParams, oracle: AdversaryOracle, claim: str,
               seed=0, space=None, asker: _Asker | None = None) -> SeedDataset:
    """Build a balanced YES/NO seed dataset using only self-claimed queries.

    Samples are returned in the working coordinates of ``space``.
    """
    A = np.atleast_2d(np.asarray(a_gt, dtype=float))
    if len(A) == 0:
        raise ValueError("QuickStart needs at least one ground-truth sample")
    space = space or RawSpace(oracle.bounds)
    ask = asker or _Asker(oracle)
    start = ask.count
    rng = _rng(seed)
    W = space.encode(A)
    m = oracle.stream_size
    yes, no = [], []

    def partial(msg):
        return PartialDatasetError(msg, SeedDataset(yes, no, ask.count - start))

    try:
        while len(yes) < params.sigma:
            i = int(rng.integers(len(A)))
            picks = [i] + [int(rng.integers(len(A))) for _ in range(m - 1)]
            stream = np.vstack([space.realize(W[j], A[j]) for j in picks])
            if ask(claim, stream, "quickstart-1") is Decision.NO:
                no.append(W[i])
            else:
                yes.append(W[i])
        del no[params.sigma:]

        R, ups = Decision.YES, 0
        while len(no) < params.sigma:
            i = int(rng.integers(len(A)))

            def draw():
                return space.clip(perturb(W[i], ups, params, rng))

            while R is Decision.YES:
                ups += 1
                if ups > params.upsilon_max:
                    raise DistortionWindowError(
                        f"no NO answer up to upsilon={params.upsilon_max}; alpha={params.alpha} is too small"
                    )
                stream = _stream(lambda: space.realize(draw(), A[i]), m)
                R = ask(claim, stream, "quickstart-2", upsilon=ups)
            zs = [draw() for _ in range(m)]
            stream = np.vstack([space.realize(z, A[i]) for z in zs])
            R = ask(claim, stream, "quickstart-2", upsilon=ups)
            if R is Decision.NO:
                no.append(zs[0])
    except BudgetExhausted:
        raise partial(f"budget exhausted with {len(yes)} YES / {len(no)} NO samples") from None
    return SeedDataset(yes, no, ask.count - start, ups)


def lime_sampler(state: AttackState, oracle: AdversaryOracle, disc: Discretizer, seed=0,
                 space=None, n_perturb: int = 500, kernel_width: float | None = None,
                 direction: str = NO, asker: _Asker | None = None) -> AttackOutcome:
    """Explanation-guided synthesis: rewrite the top-r features of an own sample, claim a known user.

    ``direction`` is the substitute-model class the rewritten features are
    pushed toward. NO (the default) moves the sample out of the region the
    oracle accepts as the adversary.
    """
    if not state.known_usernames:
        raise ValueError("no known usernames to claim (P(M) is 0 when V is empty)")
    A = np.atleast_2d(np.asarray(state.ground_truth, dtype=float))
    space = space or RawSpace(oracle.bounds)
    W = space.encode(A)
    k = W.shape[1]
    if not 1 <= state.r <= k:
        raise ValueError(f"r must lie in 1..{k}")
    ask = asker or _Asker(oracle)
    start = ask.count
    rng = _rng(seed)
    victims = list(state.known_usernames)
    m = oracle.stream_size
    cache: dict[int, Explanation] = {}

    while True:
        i = int(rng.integers(len(A)))
        if i not in cache:
            cache[i] = explain(state.substitute, W[i], direction, disc, n_perturb,
                               kernel_width, seed=int(rng.integers(2**31)) ^ i)
        e = cache[i]
        top = e.top(state.r)

        if e.degenerate:
            def draw():
                return space.clip(perturb(W[i], 1, state.params, rng))
            note, feats = "fallback-perturb", None
        else:
            def draw():
                z = W[i].copy()
                for rule in top:
                    z[rule.feature] = rng.uniform(rule.lo, rule.hi)
                return z
            note, feats = "lime", [rule.feature for rule in top]

        zs = [draw() for _ in range(m)]
        stream = np.vstack([space.realize(z, A[i]) for z in zs])
        v = victims[int(rng.integers(len(victims)))]
        try:
            R = ask(v, stream, note, features=feats)
        except BudgetExhausted:
            return AttackOutcome(False, None, ask.count - start, trace=ask.trace)
        state.history.append(HistoryEntry(zs[0], v, R, note))
        if R is Decision.YES:
            return AttackOutcome(True, v, ask.count - start, stream[0], ask.trace,
                                 final_point=zs[0], final_anchor=A[i], final_explanation=e,
                                 final_discretizer=disc)


def replay_attack(sample, oracle: AdversaryOracle, victims, stream_size: int | None = None) -> AttackOutcome:
    """Submit one own sample repeated to fill the stream, victim by victim."""
    m = oracle.stream_size if stream_size is None else stream_size
    if m != oracle.stream_size:
        raise ValueError(f"stream_size {m} does not match the oracle's {oracle.stream_size}")
    ask = _Asker(oracle)
    stream = np.tile(np.asarray(sample, dtype=float), (m, 1))
    for v in victims:
        try:
            if ask(v, stream, "replay") is Decision.YES:
                return AttackOutcome(True, v, ask.count, stream[0], ask.trace)
        except BudgetExhausted:
            break
    return AttackOutcome(False, None, ask.count, trace=ask.trace)


def feature_stats(a_gt) -> tuple[np.ndarray, np.ndarray]:
    A = np.atleast_2d(np.asarray(a_gt, dtype=float))
    return A.mean(axis=0), A.std(axis=0)


def random_attack(feature_stats, oracle: AdversaryOracle, victims, seed=0) -> AttackOutcome:
    """Draw every feature from N(mu, sd^2) of the adversary's own data until a YES."""
    mu, sd = (np.asarray(a, dtype=float) for a in feature_stats)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sd))):
        raise ValueError("feature statistics must be finite")
    victims = list(victims)
    ask = _Asker(oracle)
    if not victims:
        return AttackOutcome(False, None, 0)
    rng = _rng(seed)
    m = oracle.stream_size
    while True:
        stream = _stream(lambda: rng.normal(mu, sd), m)
        v = victims[int(rng.integers(len(victims)))]
        try:
            if ask(v, stream, "random") is Decision.YES:
                return AttackOutcome(True, v, ask.count, stream[0], ask.trace)
        except BudgetExhausted:
            return AttackOutcome(False, None, ask.count, trace=ask.trace)


def rule_flip(outcome: AttackOutcome, oracle: AdversaryOracle, space=None, stretch: float = 5.0):
    """Re-query a successful sample with its top explanation feature pushed far outside its interval.

    The feature goes ``stretch`` discretizer ranges beyond the end of the
    feature's range opposite the interval. Returns ``(feature, old, new,
    decision)``; a NO means the rule mattered to the oracle.
    """
    if not outcome.success or outcome.final_explanation is None or outcome.final_explanation.degenerate:
        raise ValueError("rule flipping needs a successful, explanation-guided outcome")
    disc = outcome.final_discretizer
    space = space or RawSpace(oracle.bounds)
    rule = outcome.final_explanation.rules[0]
    j = rule.feature
    lo, hi = disc.minimum[j], disc.maximum[j]
    span = max(hi - lo, 1e-9)
    if 0.5 * (rule.lo + rule.hi) >= 0.5 * (lo + hi):
        new = lo - stretch * span
    else:
        new = hi + stretch * span
    z = np.array(outcome.final_point, dtype=float)
    old = float(z[j])
    z[j] = new
    x = space.realize(z, outcome.final_anchor)
    stream = np.tile(x, (oracle.stream_size, 1))
    return j, old, float(new), oracle.query(outcome.accepted_identity, stream)

"""Complete attack runs for one adversary, as used by the experiment designs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..auth import AdversaryOracle, BudgetExhausted, Decision
from ..explainer import NO, fit_discretizer
from ..models import TrainConfig, TrainingError, train_substitute
from .core import (
    AttackError, AttackOutcome, AttackState, QuickStartParams, _Asker, default_r,
    feature_stats, lime_sampler, perturb, quickstart, random_attack, replay_attack,
)
from .spaces import RawSpace

ATTACKS = ("baseline", "replay", "random", "quickstart", "quickstart+lime")


@dataclass(frozen=True)
class AttackConfig:
    kind: str = "quickstart+lime"
    params: QuickStartParams = field(default_factory=QuickStartParams)
    r: int | None = None  # None -> ceil(0.1 * working dimension)
    substitute_arch: str = "nn"
    substitute_config: TrainConfig = field(default_factory=lambda: TrainConfig(hidden=16, nn_epochs=100))
    n_perturb: int = 500
    kernel_width: float | None = None
    bins: int = 4
    direction: str = NO

    def __post_init__(self):
        if self.kind not in ATTACKS:
            raise ValueError(f"unknown attack {self.kind!r}; expected one of {ATTACKS}")


def baseline_attack(a_gt, oracle: AdversaryOracle, victims) -> AttackOutcome:
    """Present the adversary's own unmodified samples under each victim's name."""
    A = np.atleast_2d(np.asarray(a_gt, dtype=float))
    ask = _Asker(oracle)
    m = oracle.stream_size
    stream = A[[j % len(A) for j in range(m)]]
    for v in victims:
        try:
            if ask(v, stream, "baseline") is Decision.YES:
                return AttackOutcome(True, v, ask.count, stream[0], ask.trace)
        except BudgetExhausted:
            break
    return AttackOutcome(False, None, ask.count, trace=ask.trace)


def _perturb_attack(a_gt, seed_dataset, params, oracle, victims, rng, space, ask) -> AttackOutcome:
    """QuickStart alone: keep perturbing own samples at the distortion that first left the own region."""
    A = np.atleast_2d(np.asarray(a_gt, dtype=float))
    W = space.encode(A)
    ups = max(seed_dataset.upsilon, 1)
    m = oracle.stream_size
    while True:
        i = int(rng.integers(len(A)))
        zs = [space.clip(perturb(W[i], ups, params, rng)) for _ in range(m)]
        stream = np.vstack([space.realize(z, A[i]) for z in zs])
        v = victims[int(rng.integers(len(victims)))]
        try:
            if ask(v, stream, "perturb", upsilon=ups) is Decision.YES:
                return AttackOutcome(True, v, ask.count, stream[0], ask.trace,
                                     final_point=zs[0], final_anchor=A[i])
        except BudgetExhausted:
            return AttackOutcome(False, None, ask.count, trace=ask.trace)


def run_attack(cfg: AttackConfig, oracle: AdversaryOracle, self_name: str, a_gt, victims,
               seed: int = 0, space=None) -> AttackOutcome:
    """Run one configured attack; module errors become a failed outcome with ``error`` set."""
    victims = list(victims)
    if not victims:
        return AttackOutcome(False, None, 0)
    space = space or RawSpace(oracle.bounds)
    rng = np.random.default_rng(seed)
    A = np.atleast_2d(np.asarray(a_gt, dtype=float))

    if cfg.kind == "baseline":
        return baseline_attack(A, oracle, victims)
    if cfg.kind == "replay":
        return replay_attack(A[int(rng.integers(len(A)))], oracle, victims)
    if cfg.kind == "random":
        return random_attack(feature_stats(A), oracle, victims, rng)

    ask = _Asker(oracle)
    try:
        seed_ds = quickstart(A, cfg.params, oracle, self_name, rng, space, ask)
        if cfg.kind == "quickstart":
            return _perturb_attack(A, seed_ds, cfg.params, oracle, victims, rng, space, ask)
        sub_cfg = cfg.substitute_config.replace(seed=int(rng.integers(2**31)))
        G = train_substitute(seed_ds, sub_cfg, cfg.substitute_arch)
        D_yes, D_no = seed_ds.arrays()
        disc = fit_discretizer(np.vstack([D_yes, D_no]), cfg.bins)
        k = D_yes.shape[1]
        state = AttackState(A, seed_ds, G, victims, cfg.r or default_r(k), seed, cfg.params)
        return lime_sampler(state, oracle, disc, rng, space, cfg.n_perturb,
                            cfg.kernel_width, cfg.direction, ask)
    except (AttackError, TrainingError) as exc:
        return AttackOutcome(False, None, ask.count, trace=ask.trace, error=f"{type(exc).__name__}: {exc}")

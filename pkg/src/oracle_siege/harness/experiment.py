"""World construction and the adversary-by-victim experiment loop."""

from __future__ import annotations

import hashlib
import multiprocessing as mp
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..attack import (
    AttackConfig, LatentCodec, LatentSpace, QuickStartParams, RawSpace, default_latent_dim,
    fit_latent_codec, run_attack,
)
from ..auth import (
    AuthSystem, Decision, OracleHandle, default_bounds, iter_streams, read_enrollment_csv,
)
from ..defenses import DefenseConfig
from ..models import TrainConfig
from .config import ExperimentConfig
from .data import generate_synthetic_principals, split_holdout
from .metrics import Cell, CoverageMatrix, MetricsReport, compute_metrics


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any sequence of printable parts."""
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


@dataclass
class World:
    """Everything fixed before the first attack query."""

    cfg: ExperimentConfig
    enroll: dict
    holdout: dict
    system: AuthSystem
    participating: list
    codec: LatentCodec | None = None
    seeds: dict = field(default_factory=dict)

    def space(self):
        if self.cfg.paradigm == "latent":
            return LatentSpace(self.codec, self.system.bounds, self.cfg.latent_keep_residual)
        return RawSpace(self.system.bounds)


def load_population(cfg: ExperimentConfig, seeds: dict) -> dict:
    if cfg.dataset == "synthetic":
        return generate_synthetic_principals(
            cfg.population, cfg.k, cfg.samples_each, cfg.separation, cfg.within_std,
            seed=seeds["data"], center_rank=cfg.center_rank, basis_seed=seeds["basis"],
        )
    return read_enrollment_csv(cfg.dataset)


def _public_corpus(cfg: ExperimentConfig, data: dict, participating: list, seed: int) -> np.ndarray:
    """Auxiliary data the codec is fitted on; it never includes participating principals."""
    if cfg.dataset == "synthetic":
        pub = generate_synthetic_principals(
            max(cfg.public_principals, 2), cfg.k, cfg.samples_each, cfg.separation,
            cfg.within_std, seed=seed, center_rank=cfg.center_rank,
            basis_seed=derive_seed(cfg.seed, "basis"), prefix="p",
        )
        return np.vstack(list(pub.values()))
    rest = [X for name, X in data.items() if name not in participating]
    return np.vstack(rest or list(data.values()))


def build_world(cfg: ExperimentConfig) -> World:
    cfg = cfg.validate()
    seeds = {name: derive_seed(cfg.seed, name)
             for name in ("data", "basis", "participants", "public", "oracle", "defense")}
    data = load_population(cfg, seeds)
    names = sorted(data)
    if len(names) < 2:
        raise ValueError("the population needs at least 2 principals")
    enroll, holdout = split_holdout(data, cfg.holdout_fraction)

    n_part = min(max(2, int(round(cfg.knowledge * len(names)))), len(names))
    rng = np.random.default_rng(seeds["participants"])
    participating = sorted(rng.choice(names, size=n_part, replace=False).tolist())

    codec = None
    if cfg.paradigm == "latent" or cfg.defense == "all":
        m = cfg.latent_dim or default_latent_dim(cfg.k)
        codec = fit_latent_codec(_public_corpus(cfg, data, participating, seeds["public"]), m,
                                 seed=seeds["public"])
    defense = None
    if cfg.defense != "none":
        oracle_codec = codec
        if cfg.defense == "all" and cfg.oracle_codec_seed is not None:
            oracle_codec = fit_latent_codec(
                _public_corpus(cfg, data, participating, cfg.oracle_codec_seed), codec.m,
                seed=cfg.oracle_codec_seed,
            )
        defense = DefenseConfig(cfg.defense, codec=oracle_codec if cfg.defense == "all" else None,
                                seed=seeds["defense"])

    X_all = np.vstack([enroll[n] for n in names])
    system = AuthSystem(
        k=X_all.shape[1], bounds=default_bounds(X_all), backend=cfg.backend, mode=cfg.oracle_mode,
        stream_size=cfg.stream_size, variance_check=cfg.variance_check,
        train_config=TrainConfig(seed=seeds["oracle"] % 2**31), defense=defense,
    ).with_principals({n: enroll[n] for n in names})
    return World(cfg, enroll, holdout, system, participating, codec, seeds)


def attack_config(cfg: ExperimentConfig) -> AttackConfig:
    beta, alpha = cfg.distortion_window()
    params = QuickStartParams(beta, alpha, cfg.sigma, cfg.upsilon_max)
    return AttackConfig(cfg.attack, params, cfg.r, n_perturb=cfg.n_perturb,
                        kernel_width=cfg.kernel_width, bins=cfg.bins)


def self_authenticate(world: World, name: str) -> tuple[Cell, list]:
    """Diagonal cell: the principal's first hold-out stream under its own name."""
    handle = OracleHandle(world.system, budget=1)
    stream = next(iter_streams(world.holdout[name], world.system.stream_size))
    decision = handle.authenticate(name, stream)
    entry = handle.audit_log[-1]
    cell = Cell(decision is Decision.YES, 1, entry.confidence, name if decision else None)
    return cell, [e.to_json() for e in handle.audit_log]


def run_pair(world: World, adversary: str, victim: str) -> tuple[Cell, dict]:
    cfg = world.cfg
    seed = derive_seed(cfg.seed, adversary, victim, cfg.attack)
    handle = OracleHandle(world.system, cfg.budget)
    a_gt = world.holdout[adversary] if cfg.attack == "baseline" else world.enroll[adversary]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # small-n_perturb and seed-overlap notices
            outcome = run_attack(attack_config(cfg), handle.adversary_view(), adversary, a_gt,
                                 [victim], seed=seed, space=world.space())
        error = outcome.error
        success, trace = outcome.success, outcome.trace
    except Exception as exc:  # a broken pair must not sink the experiment
        error, success, trace = f"{type(exc).__name__}: {exc}", False, []
    last = handle.audit_log[-1] if handle.audit_log else None
    cell = Cell(
        success=bool(success),
        queries=handle.query_count,
        internal_confidence=None if last is None else last.confidence,
        accepted=victim if success else None,
        error=error,
    )
    record = {
        "adversary": adversary, "victim": victim, "seed": seed, "success": cell.success,
        "trace": trace, "audit": [e.to_json() for e in handle.audit_log],
    }
    return cell, record


_WORLD: World | None = None


def _init_worker(world: World):
    global _WORLD
    _WORLD = world


def _pair_task(pair):
    return run_pair(_WORLD, *pair)


@dataclass
class ExperimentResult:
    matrix: CoverageMatrix
    metrics: MetricsReport
    traces: list
    world: World

    def report(self) -> dict:
        """Deterministic, JSON-ready summary of the run."""
        return {
            "config": self.world.cfg.to_dict(),
            "seeds": {"master": self.world.cfg.seed, **self.world.seeds},
            "participating": list(self.matrix.principals),
            "metrics": self.metrics.to_json(),
            "matrix": self.matrix.to_json(),
        }


def run_experiment(cfg: ExperimentConfig, world: World | None = None) -> ExperimentResult:
    """Attack every ordered pair of participating principals; the diagonal is self-authentication."""
    world = world or build_world(cfg)
    cfg = world.cfg
    names = world.participating
    matrix = CoverageMatrix(list(names))
    traces = []
    for a in names:
        cell, audit = self_authenticate(world, a)
        matrix[(a, a)] = cell
        traces.append({"adversary": a, "victim": a, "self": True, "audit": audit})

    pairs = [(a, v) for a in names for v in names if a != v]
    if cfg.workers > 1 and len(pairs) > 1:
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(cfg.workers, mp_context=ctx, initializer=_init_worker,
                                 initargs=(world,)) as pool:
            results = list(pool.map(_pair_task, pairs, chunksize=max(1, len(pairs) // (4 * cfg.workers))))
    else:
        results = [run_pair(world, a, v) for a, v in pairs]
    for (a, v), (cell, record) in zip(pairs, results):
        matrix[(a, v)] = cell
        traces.append(record)
    return ExperimentResult(matrix, compute_metrics(matrix, names), traces, world)

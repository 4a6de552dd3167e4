"""Experiment configuration: defaults, profiles, file loading and validation."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..attack import ATTACKS

SEED_ENV = "ORACLE_SIEGE_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # oracle
    backend: str = "nn"
    oracle_mode: str = "multiclass"
    defense: str = "none"
    stream_size: int = 1
    variance_check: float | None = None
    # adversary
    attack: str = "quickstart+lime"
    paradigm: str = "raw"
    knowledge: float = 0.3
    budget: int = 200
    beta: float | None = None  # None -> paradigm default
    alpha: float | None = None
    sigma: int = 25
    upsilon_max: int = 30
    r: int | None = None
    n_perturb: int = 500
    kernel_width: float | None = None
    bins: int = 4
    latent_dim: int | None = None
    latent_keep_residual: bool = True
    public_principals: int = 30
    oracle_codec_seed: int | None = None  # None -> oracle shares the adversary's codec
    # data
    dataset: str = "synthetic"  # or a CSV path
    population: int = 50
    k: int = 128
    samples_each: int = 15
    separation: float = 10.0
    within_std: float = 1.0
    center_rank: int | None = None
    holdout_fraction: float = 1 / 3
    # run
    seed: int = 0
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.backend in ("rf", "svm", "nn"), f"backend must be rf, svm or nn (got {self.backend!r})")
        need(self.oracle_mode in ("multiclass", "per-principal"), "oracle_mode must be multiclass or per-principal")
        need(self.defense in ("none", "random", "all"), "defense must be none, random or all")
        need(self.attack in ATTACKS, f"attack must be one of {', '.join(ATTACKS)}")
        need(self.paradigm in ("raw", "latent"), "paradigm must be raw or latent")
        need(0 < self.knowledge <= 1, "knowledge must lie in (0, 1]")
        need(self.budget >= 1 and self.sigma >= 1 and self.stream_size >= 1, "budget, sigma and stream_size must be positive")
        need(self.population >= 2 and self.k >= 1 and self.samples_each >= 2, "population >= 2, k >= 1, samples_each >= 2")
        need(0 < self.holdout_fraction < 1, "holdout_fraction must lie in (0, 1)")
        need(self.workers >= 1, "workers must be positive")
        need(self.beta is None or self.beta > 0, "beta must be positive")
        need(self.alpha is None or self.beta is None or self.alpha >= self.beta, "alpha must be >= beta")
        need(self.r is None or self.r >= 1, "r must be positive")
        if self.latent_dim is not None:
            need(1 <= self.latent_dim <= self.k, "latent_dim must lie in 1..k")
        if self.dataset != "synthetic":
            need(Path(self.dataset).exists(), f"dataset file not found: {self.dataset}")
        return self

    def distortion_window(self) -> tuple[float, float]:
        beta_d, alpha_d = (0.5, 32.0) if self.paradigm == "latent" else (0.25, 8.0)
        return (self.beta or beta_d), (self.alpha or alpha_d)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw).validate()


PROFILES = {
    "biometric": {},
    "host": {
        "population": 7, "k": 16, "samples_each": 30, "stream_size": 7,
        "backend": "rf", "oracle_mode": "per-principal", "knowledge": 1.0,
    },
}


def from_mapping(data: dict) -> ExperimentConfig:
    data = dict(data)
    profile = data.pop("profile", "biometric")
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return ExperimentConfig(**{**PROFILES[profile], **data}).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None = None, env: dict | None = None) -> ExperimentConfig:
    """Read a TOML or JSON config; ``ORACLE_SIEGE_SEED`` overrides its seed."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        try:
            raw = p.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        try:
            if p.suffix.lower() == ".json":
                data = json.loads(raw)
            else:
                data = tomllib.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise ConfigError(f"{p}: {exc}") from None
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            data["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    return from_mapping(data)

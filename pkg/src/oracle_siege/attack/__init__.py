from .campaign import ATTACKS, AttackConfig, baseline_attack, run_attack
from .core import (
    AttackError, AttackOutcome, AttackState, DistortionWindowError, HistoryEntry,
    PartialDatasetError, QuickStartParams, SeedDataset, default_r, distortion,
    feature_stats, lime_sampler, perturb, quickstart, random_attack, replay_attack, rule_flip,
)
from .latent import LatentCodec, default_latent_dim, fit_latent_codec
from .spaces import LatentSpace, RawSpace

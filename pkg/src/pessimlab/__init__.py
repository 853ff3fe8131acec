"""Tabular offline RL laboratory: LCB learners, hard instances, exact oracles and a sweep harness."""

from .algorithms import (
    EpisodicShape,
    MdpShape,
    behavior_cloning,
    empirical_best_arm,
    episodic_vi_lcb,
    lcb_cb,
    lcb_mab,
    most_played_arm,
    vi_lcb,
)
from .data_gen import Dataset, concentrability, sample_dataset, sample_stats
from .env_core import BanditInstance, CbInstance, DiscountedMdp, EpisodicMdp, RewardDistribution, RewardTable
from .estimators import BanditLearner, ContextualLearner, EpisodicViLcb, ViLcb
from .harness import ExperimentConfig, fit_rate, run_sweep, summarize, verify_suite
from .instances import HardInstance, certify

__version__ = "0.1.0"

__all__ = [
    "BanditInstance", "BanditLearner", "CbInstance", "ContextualLearner", "Dataset", "DiscountedMdp",
    "EpisodicMdp", "EpisodicShape", "EpisodicViLcb", "ExperimentConfig", "HardInstance", "MdpShape",
    "RewardDistribution", "RewardTable", "ViLcb", "behavior_cloning", "certify", "concentrability",
    "empirical_best_arm", "episodic_vi_lcb", "fit_rate", "lcb_cb", "lcb_mab", "most_played_arm",
    "run_sweep", "sample_dataset", "sample_stats", "summarize", "verify_suite", "vi_lcb",
]

"""Training, fine-tuning and adversarial fine-tuning configurations."""

from dataclasses import dataclass
from typing import Tuple

from coderet import config as app_config
from coderet.errors import ConfigError

STRATEGIES = ("inbatch", "hardneg", "ar2")


@dataclass
class TrainConfig:
    batch_size: int = app_config.BATCH_SIZE
    steps: int = app_config.PRETRAIN_STEPS
    lr: float = app_config.PRETRAIN_LR
    weight_decay: float = app_config.WEIGHT_DECAY
    warmup_steps: int = app_config.WARMUP_STEPS
    seed: int = app_config.SEED
    modality_mix: Tuple[float, float, float] = app_config.MODALITY_MIX  # uni, doc, comment
    hybrid_languages: bool = app_config.HYBRID_LANGUAGES
    temperature: float = app_config.PRETRAIN_TEMPERATURE
    embed_dim: int = app_config.EMBED_DIM
    vocab_size: int = app_config.VOCAB_SIZE
    log_every: int = app_config.LOG_EVERY
    diagnostic_pairs: int = app_config.DIAGNOSTIC_PAIRS

    def __post_init__(self):
        self.modality_mix = tuple(float(m) for m in self.modality_mix)
        if len(self.modality_mix) != 3 or any(m < 0 for m in self.modality_mix):
            raise ConfigError(f"modality_mix must be three non-negative proportions, got {self.modality_mix}")
        if abs(sum(self.modality_mix) - 1.0) > 1e-6:
            raise ConfigError(f"modality_mix must sum to 1, got {sum(self.modality_mix)}")
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.steps < 1 or self.log_every < 1:
            raise ConfigError("steps and log_every must be positive")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")


@dataclass
class FinetuneConfig:
    strategy: str = app_config.FINETUNE_STRATEGY
    steps: int = app_config.FINETUNE_STEPS
    lr: float = app_config.FINETUNE_LR
    weight_decay: float = app_config.WEIGHT_DECAY
    batch_size: int = app_config.FINETUNE_BATCH_SIZE
    temperature: float = app_config.FINETUNE_TEMPERATURE
    hard_negative_k: int = app_config.HARD_NEGATIVE_K
    refresh_every: int = app_config.REFRESH_EVERY
    warmup_steps: int = app_config.WARMUP_STEPS
    seed: int = app_config.SEED

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown fine-tuning strategy '{self.strategy}' (expected one of {STRATEGIES})")
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.hard_negative_k < 1 or self.refresh_every < 1:
            raise ConfigError("hard_negative_k and refresh_every must be positive")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")


@dataclass
class AR2Config:
    negative_size: int = app_config.AR2_NEGATIVE_SIZE
    pool_size: int = app_config.AR2_POOL_SIZE
    g_lr: float = app_config.AR2_G_LR
    d_lr: float = app_config.AR2_D_LR
    g_steps: int = app_config.AR2_G_STEPS
    d_steps: int = app_config.AR2_D_STEPS
    rounds: int = app_config.AR2_ROUNDS
    refresh_every: int = app_config.REFRESH_EVERY
    batch_size: int = app_config.AR2_BATCH_SIZE
    warmup_proportion: float = app_config.AR2_WARMUP_PROPORTION
    g_supervised_weight: float = app_config.AR2_G_SUPERVISED_WEIGHT
    temperature: float = app_config.FINETUNE_TEMPERATURE
    d_dim: int = app_config.CROSS_DIM
    weight_decay: float = app_config.WEIGHT_DECAY
    seed: int = app_config.SEED

    def __post_init__(self):
        if self.negative_size < 1:
            raise ConfigError(f"negative_size must be >= 1, got {self.negative_size}")
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1, got {self.rounds}")
        if self.pool_size < self.negative_size:
            raise ConfigError("pool_size must be at least negative_size")
        if not 0 <= self.warmup_proportion < 1:
            raise ConfigError("warmup_proportion must be in [0, 1)")
        if self.batch_size < 1 or self.g_steps < 0 or self.d_steps < 0:
            raise ConfigError("batch_size must be positive and step counts non-negative")

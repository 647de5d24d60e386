"""
Run configuration: YAML file, environment and CLI values resolved into one flat
PipelineConfig, from which the per-stage configs are derived.
"""

import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional

import yaml

from coderet import config as app_config
from coderet.errors import ConfigError
from coderet.pairmine.pairs import MiningConfig
from coderet.train.config import AR2Config, FinetuneConfig, TrainConfig

ENV_PREFIX = "CODERET_"

# marks a key the YAML file leaves out; an explicit null in the file is a value
UNSET = object()


def load_yaml_config(file_path):
    if not file_path or not os.path.exists(file_path):
        return {}
    with open(file_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def get_config_value(cli_value, yaml_value, env_var, default=None):
    """
    Resolve config value in priority order:
    CLI arg → YAML config → ENV → default
    Environment values are parsed as YAML scalars.
    """
    if cli_value is not None:
        return cli_value
    if yaml_value is not UNSET:
        return yaml_value
    if env_var and os.getenv(env_var) is not None:
        return yaml.safe_load(os.getenv(env_var))
    return default


@dataclass
class PipelineConfig:
    # corpus
    corpus_root: str = app_config.CORPUS_ROOT
    languages: List[str] = None
    queries_path: str = app_config.QUERIES_PATH
    train_queries_path: Optional[str] = None
    groups_path: Optional[str] = app_config.GROUPS_PATH
    seed: int = app_config.SEED
    parse_workers: int = app_config.PARSE_WORKERS

    # mining
    tau1: float = app_config.TAU1
    tau2: float = app_config.TAU2
    tau2_keep_fraction: Optional[float] = app_config.TAU2_KEEP_FRACTION
    top_k: int = app_config.MINING_TOP_K
    matcher_temperature: float = app_config.MATCHER_TEMPERATURE
    matcher_epochs: int = app_config.MATCHER_EPOCHS
    matcher_batch_size: int = app_config.MATCHER_BATCH_SIZE
    matcher_lr: float = app_config.MATCHER_LR
    matcher_dim: int = app_config.MATCHER_DIM
    token_dropout: float = app_config.TOKEN_DROPOUT
    negative_ratio: int = app_config.NEGATIVE_RATIO
    cross_epochs: int = app_config.CROSS_EPOCHS
    cross_batch_size: int = app_config.CROSS_BATCH_SIZE
    cross_lr: float = app_config.CROSS_LR
    cross_dim: int = app_config.CROSS_DIM
    denoise: bool = app_config.DENOISE

    # pre-training
    embed_dim: int = app_config.EMBED_DIM
    vocab_size: int = app_config.VOCAB_SIZE
    batch_size: int = app_config.BATCH_SIZE
    pretrain_steps: int = app_config.PRETRAIN_STEPS
    pretrain_lr: float = app_config.PRETRAIN_LR
    weight_decay: float = app_config.WEIGHT_DECAY
    warmup_steps: int = app_config.WARMUP_STEPS
    modality_mix: List[float] = None
    hybrid_languages: bool = app_config.HYBRID_LANGUAGES
    pretrain_temperature: float = app_config.PRETRAIN_TEMPERATURE
    log_every: int = app_config.LOG_EVERY
    diagnostic_pairs: int = app_config.DIAGNOSTIC_PAIRS

    # fine-tuning
    finetune_strategy: str = app_config.FINETUNE_STRATEGY
    finetune_steps: int = app_config.FINETUNE_STEPS
    finetune_lr: float = app_config.FINETUNE_LR
    finetune_batch_size: int = app_config.FINETUNE_BATCH_SIZE
    finetune_temperature: float = app_config.FINETUNE_TEMPERATURE
    hard_negative_k: int = app_config.HARD_NEGATIVE_K
    refresh_every: int = app_config.REFRESH_EVERY

    # AR2
    ar2_negative_size: int = app_config.AR2_NEGATIVE_SIZE
    ar2_pool_size: int = app_config.AR2_POOL_SIZE
    ar2_g_lr: float = app_config.AR2_G_LR
    ar2_d_lr: float = app_config.AR2_D_LR
    ar2_g_steps: int = app_config.AR2_G_STEPS
    ar2_d_steps: int = app_config.AR2_D_STEPS
    ar2_rounds: int = app_config.AR2_ROUNDS
    ar2_batch_size: int = app_config.AR2_BATCH_SIZE
    ar2_warmup_proportion: float = app_config.AR2_WARMUP_PROPORTION
    ar2_g_supervised_weight: float = app_config.AR2_G_SUPERVISED_WEIGHT

    # evaluation
    eval_mode: str = app_config.EVAL_MODE
    target_lang: Optional[str] = None

    def __post_init__(self):
        if self.languages is None:
            self.languages = list(app_config.LANGUAGES)
        if isinstance(self.languages, str):
            self.languages = [lang.strip() for lang in self.languages.split(",") if lang.strip()]
        self.languages = list(self.languages)
        if self.modality_mix is None:
            self.modality_mix = list(app_config.MODALITY_MIX)
        self.modality_mix = [float(m) for m in self.modality_mix]
        if self.eval_mode not in ("text", "code"):
            raise ConfigError(f"eval_mode must be 'text' or 'code', got '{self.eval_mode}'")
        if not self.languages:
            raise ConfigError("languages must not be empty")

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "PipelineConfig":
        data = dict(data or {})
        unknown = sorted(set(data) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return {key: value for key, value in sorted(asdict(self).items())}

    def replace(self, **overrides) -> "PipelineConfig":
        """Copy with non-None overrides applied."""
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return PipelineConfig.from_dict(data)

    def mining(self) -> MiningConfig:
        return MiningConfig(
            tau1=self.tau1, tau2=self.tau2, top_k=self.top_k,
            matcher_temperature=self.matcher_temperature, matcher_epochs=self.matcher_epochs,
            negative_ratio=self.negative_ratio, matcher_batch_size=self.matcher_batch_size,
            matcher_lr=self.matcher_lr, matcher_dim=self.matcher_dim, token_dropout=self.token_dropout,
            cross_epochs=self.cross_epochs, cross_batch_size=self.cross_batch_size,
            cross_lr=self.cross_lr, cross_dim=self.cross_dim, weight_decay=self.weight_decay,
            denoise=self.denoise, tau2_keep_fraction=self.tau2_keep_fraction, seed=self.seed,
        )

    def training(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size, steps=self.pretrain_steps, lr=self.pretrain_lr,
            weight_decay=self.weight_decay, warmup_steps=self.warmup_steps, seed=self.seed,
            modality_mix=tuple(self.modality_mix), hybrid_languages=self.hybrid_languages,
            temperature=self.pretrain_temperature, embed_dim=self.embed_dim,
            vocab_size=self.vocab_size, log_every=self.log_every,
            diagnostic_pairs=self.diagnostic_pairs,
        )

    def finetuning(self) -> FinetuneConfig:
        return FinetuneConfig(
            strategy=self.finetune_strategy, steps=self.finetune_steps, lr=self.finetune_lr,
            weight_decay=self.weight_decay, batch_size=self.finetune_batch_size,
            temperature=self.finetune_temperature, hard_negative_k=self.hard_negative_k,
            refresh_every=self.refresh_every, warmup_steps=self.warmup_steps, seed=self.seed,
        )

    def ar2(self) -> AR2Config:
        return AR2Config(
            negative_size=self.ar2_negative_size, pool_size=self.ar2_pool_size,
            g_lr=self.ar2_g_lr, d_lr=self.ar2_d_lr, g_steps=self.ar2_g_steps,
            d_steps=self.ar2_d_steps, rounds=self.ar2_rounds, refresh_every=self.refresh_every,
            batch_size=self.ar2_batch_size, warmup_proportion=self.ar2_warmup_proportion,
            g_supervised_weight=self.ar2_g_supervised_weight,
            temperature=self.finetune_temperature, d_dim=self.cross_dim,
            weight_decay=self.weight_decay, seed=self.seed,
        )


def dump_config(config: PipelineConfig) -> str:
    """Canonical YAML: sorted keys, block style."""
    return yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=False)


def parse_config(text: str) -> PipelineConfig:
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values")
    return PipelineConfig.from_dict(data)


def load_pipeline_config(path: Optional[str] = None, **cli_overrides) -> PipelineConfig:
    """
    Resolve every key with get_config_value: CLI override, then the YAML file,
    then CODERET_<KEY> from the environment, then the default.
    """
    if path and not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    yaml_config = load_yaml_config(path)
    if not isinstance(yaml_config, dict):
        raise ConfigError(f"{path}: config must be a mapping of keys to values")
    unknown = sorted(set(yaml_config) - set(PipelineConfig.keys()))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")

    defaults = PipelineConfig()
    resolved = {
        key: get_config_value(cli_overrides.get(key), yaml_config.get(key, UNSET),
                              ENV_PREFIX + key.upper(), getattr(defaults, key))
        for key in PipelineConfig.keys()
    }
    return PipelineConfig.from_dict(resolved)

"""Pre-training and fine-tuning loops."""

from coderet.train.ar2 import RoundStats, ar2_finetune
from coderet.train.batching import Example, PairSampler
from coderet.train.config import STRATEGIES, AR2Config, FinetuneConfig, TrainConfig
from coderet.train.finetune import (
    HardNegatives,
    finetune,
    finetune_hard_negative,
    finetune_in_batch,
    mine_hard_negatives,
)
from coderet.train.pretrain import PretrainResult, build_encoder_vocab, pretrain

__all__ = [
    'AR2Config',
    'Example',
    'FinetuneConfig',
    'HardNegatives',
    'PairSampler',
    'PretrainResult',
    'RoundStats',
    'STRATEGIES',
    'TrainConfig',
    'ar2_finetune',
    'build_encoder_vocab',
    'finetune',
    'finetune_hard_negative',
    'finetune_in_batch',
    'mine_hard_negatives',
    'pretrain',
]

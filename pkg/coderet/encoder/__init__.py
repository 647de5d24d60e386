"""The compact siamese encoder: parameters, forward/backward, losses and optimizer."""

from coderet.encoder.checkpoint import load_checkpoint, save_checkpoint
from coderet.encoder.losses import (
    Batch,
    contrastive_loss,
    distillation_loss,
    info_nce,
    objective_terms,
    total_loss,
)
from coderet.encoder.model import (
    code_features,
    drop_tokens,
    encode,
    encode_many,
    encode_texts,
    similarity,
    text_features,
)
from coderet.encoder.optim import OptimizerState, linear_schedule, optimizer_step
from coderet.encoder.params import EncoderParams, build_vocab

__all__ = [
    'Batch',
    'EncoderParams',
    'OptimizerState',
    'build_vocab',
    'code_features',
    'contrastive_loss',
    'distillation_loss',
    'drop_tokens',
    'encode',
    'encode_many',
    'encode_texts',
    'info_nce',
    'linear_schedule',
    'load_checkpoint',
    'objective_terms',
    'optimizer_step',
    'save_checkpoint',
    'similarity',
    'text_features',
    'total_loss',
]

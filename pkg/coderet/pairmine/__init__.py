"""Positive-pair corpora: code-doc, code-comment and mined code-code pairs."""

from coderet.pairmine.code_code import CodeCodeMining, build_code_code_corpus, mine_code_code
from coderet.pairmine.cross_model import (
    CrossModelParams,
    cross_scores,
    denoise_pairs,
    filter_by_score,
    sample_negative_pairs,
    score_pairs,
    train_cross_model,
)
from coderet.pairmine.matcher import mine_candidate_pairs, train_matcher
from coderet.pairmine.pairs import (
    MiningConfig,
    TrainingPair,
    build_code_comment_pairs,
    build_code_doc_pairs,
    read_pairs,
    resolve_text,
    write_pairs,
)

__all__ = [
    'CodeCodeMining',
    'CrossModelParams',
    'MiningConfig',
    'TrainingPair',
    'build_code_code_corpus',
    'build_code_comment_pairs',
    'build_code_doc_pairs',
    'cross_scores',
    'denoise_pairs',
    'filter_by_score',
    'mine_candidate_pairs',
    'mine_code_code',
    'read_pairs',
    'resolve_text',
    'sample_negative_pairs',
    'score_pairs',
    'train_cross_model',
    'train_matcher',
    'write_pairs',
]

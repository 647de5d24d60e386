"""Exact dense retrieval, evaluation metrics and embedding export."""

from coderet.retrieval.evaluate import EvalReport, cross_language_gap, evaluate, evaluate_code_to_code
from coderet.retrieval.index import DenseIndex, build_index, export_embeddings, load_embeddings
from coderet.retrieval.metrics import alignment, average_precision_at_r, map_at_r, mrr, uniformity
from coderet.retrieval.queries import (
    LabeledPair,
    labeled_pairs_from_docs,
    load_groups,
    load_queries,
    planted_pairs,
)

__all__ = [
    'DenseIndex',
    'EvalReport',
    'LabeledPair',
    'alignment',
    'average_precision_at_r',
    'build_index',
    'cross_language_gap',
    'evaluate',
    'evaluate_code_to_code',
    'export_embeddings',
    'labeled_pairs_from_docs',
    'load_embeddings',
    'load_groups',
    'load_queries',
    'map_at_r',
    'mrr',
    'planted_pairs',
    'uniformity',
]

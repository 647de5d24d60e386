"""Ranking metrics and embedding-geometry diagnostics."""

import math
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import logsumexp


def mrr(ranks: Sequence[Optional[int]]) -> float:
    """Mean reciprocal rank; a miss (None) contributes 0."""
    if len(ranks) == 0:
        raise ValueError("mrr of an empty rank list")
    return float(np.mean([0.0 if r is None else 1.0 / r for r in ranks]))


def average_precision_at_r(gold: Iterable[str], ranking: Sequence[str]) -> float:
    """AP truncated at R = |gold|: (1/R) * sum of precision@i over relevant positions i <= R."""
    gold = set(gold)
    r = len(gold)
    if r == 0:
        raise ValueError("gold set must be non-empty")
    hits = 0
    total = 0.0
    for i, item in enumerate(ranking[:r], start=1):
        if item in gold:
            hits += 1
            total += hits / i
    return total / r


def map_at_r(gold_sets: Sequence[Iterable[str]], rankings: Sequence[Sequence[str]]) -> float:
    if len(gold_sets) != len(rankings):
        raise ValueError("one ranking per gold set expected")
    if not gold_sets:
        return 0.0
    return float(np.mean([average_precision_at_r(g, r) for g, r in zip(gold_sets, rankings)]))


def alignment(left: np.ndarray, right: np.ndarray) -> float:
    """Mean squared distance between matched (positive) embeddings."""
    left, right = np.atleast_2d(left), np.atleast_2d(right)
    if left.shape != right.shape or len(left) == 0:
        raise ValueError("alignment needs at least one pair of equally shaped embeddings")
    return float(np.mean(np.sum((left - right) ** 2, axis=1)))


def uniformity(embeddings: np.ndarray, t: float = 2.0) -> float:
    """log of the mean Gaussian potential exp(-t * |u - v|^2) over distinct unordered pairs."""
    embeddings = np.atleast_2d(embeddings)
    if len(embeddings) < 2:
        raise ValueError("uniformity needs at least 2 embeddings")
    sq_dists = np.maximum(pdist(embeddings, "sqeuclidean"), 0.0)
    return float(logsumexp(-t * sq_dists) - math.log(len(sq_dists)))


def first_gold_rank(ranking: Sequence[str], gold: Iterable[str]) -> Optional[int]:
    gold = set(gold)
    for i, item in enumerate(ranking, start=1):
        if item in gold:
            return i
    return None

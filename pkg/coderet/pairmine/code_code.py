"""Two-step code-code pair construction: mine by name and doc similarity, then denoise."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from coderet.corpus.records import FunctionRecord
from coderet.errors import MiningError
from coderet.pairmine.cross_model import (
    calibrated_threshold,
    denoise_pairs,
    score_pairs,
    train_cross_model,
)
from coderet.pairmine.matcher import mine_candidate_pairs, train_matcher
from coderet.pairmine.pairs import MiningConfig, TrainingPair

logger = logging.getLogger(__name__)


@dataclass
class CodeCodeMining:
    """Everything one mining run produces: raw candidates, survivors and diagnostics."""
    pairs: List[TrainingPair]
    name_candidates: List[TrainingPair]
    doc_candidates: List[TrainingPair]
    threshold: Optional[float] = None
    stats: Dict = field(default_factory=dict)


def _union(*pair_lists: Sequence[TrainingPair]) -> List[TrainingPair]:
    """Merge pair lists, one entry per unordered pair; on overlap the higher match score wins, doc match on ties."""
    merged: Dict = {}
    for pairs in pair_lists:
        for p in pairs:
            current = merged.get(p.key)
            if current is None or (p.match_score or 0.0) >= (current.match_score or 0.0):
                merged[p.key] = p
    return [merged[key] for key in sorted(merged)]


def mine_code_code(corpus: Sequence[FunctionRecord], config: MiningConfig) -> CodeCodeMining:
    name_texts = [r.name_normalized for r in corpus if r.name_normalized]
    name_matcher = train_matcher(name_texts, config, label="NameMatcher")
    name_candidates = mine_candidate_pairs(corpus, name_matcher, "name_normalized", config)

    doc_texts = [r.doc for r in corpus if r.doc]
    if len(doc_texts) >= 2 * config.matcher_batch_size:
        doc_matcher = train_matcher(doc_texts, config, label="DocMatcher")
        doc_candidates = mine_candidate_pairs(corpus, doc_matcher, "doc", config)
    else:
        logger.warning(f"Only {len(doc_texts)} documented functions, doc-matched candidates are empty")
        doc_candidates = []

    stats = {"candidates_name": len(name_candidates), "candidates_doc": len(doc_candidates)}
    if not config.denoise:
        pairs = _union(name_candidates, doc_candidates)
        stats["kept"] = len(pairs)
        return CodeCodeMining(pairs, name_candidates, doc_candidates, None, stats)

    cross_stats: Dict = {}
    cross_model = train_cross_model(doc_candidates, corpus, config, stats=cross_stats)
    stats["cross_model"] = cross_stats

    scored_name = score_pairs(name_candidates, cross_model, corpus)
    scored_doc = score_pairs(doc_candidates, cross_model, corpus)
    if config.tau2_keep_fraction is not None:
        threshold = calibrated_threshold(scored_doc, config.tau2_keep_fraction)
    else:
        threshold = config.tau2

    pairs = _union(
        denoise_pairs(name_candidates, cross_model, corpus, config, threshold=threshold),
        denoise_pairs(doc_candidates, cross_model, corpus, config, threshold=threshold),
    )
    stats["kept"] = len(pairs)
    stats["threshold"] = threshold
    logger.info(f"Code-code corpus: {len(pairs)} pairs survive denoising "
                f"({len(name_candidates)} name / {len(doc_candidates)} doc candidates)")
    return CodeCodeMining(pairs, scored_name, scored_doc, threshold, stats)


def build_code_code_corpus(corpus: Sequence[FunctionRecord], config: MiningConfig) -> List[TrainingPair]:
    """
    Mine candidates with the NameMatcher and DocMatcher, train the CrossModel on the
    doc-matched set and keep the denoised union. Cross-language pairs are kept and
    flagged via their language fields.
    """
    if not corpus:
        raise MiningError("empty corpus")
    return mine_code_code(corpus, config).pairs

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from coderet.corpus.records import FunctionRecord
from coderet.encoder.model import encode_texts
from coderet.encoder.params import EncoderParams
from coderet.retrieval.index import DenseIndex, build_index
from coderet.retrieval.metrics import alignment, first_gold_rank, map_at_r, mrr, uniformity
from coderet.retrieval.queries import LabeledPair
from coderet.utils import write_json

logger = logging.getLogger(__name__)


@dataclass
class EvalReport:
    """Per-query ranks (None = gold never retrieved), MRR, optional MAP@R and geometry diagnostics."""
    per_query_rank: List[Optional[int]]
    mrr: float
    map_at_r: Optional[float] = None
    l_align: Optional[float] = None
    l_uniform: Optional[float] = None
    config: Dict[str, Any] = field(default_factory=dict)
    query_ids: List[str] = field(default_factory=list)
    mode: str = "text"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "mrr": self.mrr,
            "map_at_r": self.map_at_r,
            "l_align": self.l_align,
            "l_uniform": self.l_uniform,
            "num_queries": len(self.per_query_rank),
            "per_query_rank": list(self.per_query_rank),
            "query_ids": list(self.query_ids),
            "config": self.config,
        }

    def write(self, path: str) -> str:
        write_json(self.to_dict(), path)
        return path


def _safe_uniformity(vectors: np.ndarray) -> Optional[float]:
    return uniformity(vectors) if len(vectors) >= 2 else None


def evaluate(
    params: EncoderParams,
    index: DenseIndex,
    queries: Sequence[LabeledPair],
    config: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """
    Text-to-code evaluation against the full index pool. Alignment is measured between
    each query and its first gold function present in the index.
    """
    if not queries:
        raise ValueError("no queries to evaluate")
    query_vectors = encode_texts(params, [q.query for q in queries])
    ranks, aligned_q, aligned_c = [], [], []
    for q, vec in zip(queries, query_vectors):
        ranks.append(first_gold_rank(index.rank_all(vec), q.gold_ids))
        gold = next((g for g in q.gold_ids if index.position(g) is not None), None)
        if gold is not None:
            aligned_q.append(vec)
            aligned_c.append(index.vector(gold))

    report = EvalReport(
        per_query_rank=ranks,
        mrr=mrr(ranks),
        l_align=alignment(np.array(aligned_q), np.array(aligned_c)) if aligned_q else None,
        l_uniform=_safe_uniformity(index.vectors),
        config=dict(config or {}),
        query_ids=[q.query_id for q in queries],
        mode="text",
    )
    misses = sum(r is None for r in ranks)
    logger.info(f"MRR {report.mrr:.4f} over {len(queries)} queries ({misses} misses)")
    return report


def evaluate_code_to_code(
    params: EncoderParams,
    corpus: Sequence[FunctionRecord],
    groups: Dict[str, List[str]],
    config: Optional[Dict[str, Any]] = None,
    languages: Optional[Sequence[str]] = None,
) -> EvalReport:
    """
    Every grouped function queries the pool (itself excluded); the rest of its group is
    the gold set, so R = group size - 1. `languages` restricts the candidate pool.
    """
    index = build_index(params, corpus, languages=languages)
    by_id = {r.id: r for r in corpus}
    grouped = dict.fromkeys(i for ids in groups.values() for i in ids if i in by_id)
    query_index = build_index(params, [by_id[i] for i in grouped])

    ranks, gold_sets, rankings, query_ids = [], [], [], []
    for name in sorted(groups):
        members = [i for i in groups[name] if i in by_id]
        for fid in members:
            gold = [g for g in members if g != fid and index.position(g) is not None]
            if not gold:
                continue
            ranking = [i for i in index.rank_all(query_index.vector(fid)) if i != fid]
            ranks.append(first_gold_rank(ranking, gold))
            gold_sets.append(gold)
            rankings.append(ranking)
            query_ids.append(fid)

    if not ranks:
        raise ValueError("no group has two members in the evaluated pool")
    pairs = [(query_index.vector(q), index.vector(g[0])) for q, g in zip(query_ids, gold_sets)]
    report = EvalReport(
        per_query_rank=ranks,
        mrr=mrr(ranks),
        map_at_r=map_at_r(gold_sets, rankings),
        l_align=alignment(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])),
        l_uniform=_safe_uniformity(index.vectors),
        config=dict(config or {}),
        query_ids=query_ids,
        mode="code",
    )
    logger.info(f"Code-to-code MAP@R {report.map_at_r:.4f}, MRR {report.mrr:.4f} over {len(ranks)} queries")
    return report


def cross_language_gap(
    params: EncoderParams,
    records: Sequence[FunctionRecord],
    planted: Sequence[Tuple[str, str]],
    rng: np.random.Generator,
    samples: int = 500,
) -> Dict[str, float]:
    """
    Mean cosine of planted cross-language equivalents minus the mean cosine of random
    cross-language pairs.
    """
    index = build_index(params, records)
    by_id = {r.id: r for r in records}
    cross = [(a, b) for a, b in planted
             if a in by_id and b in by_id and by_id[a].language != by_id[b].language]
    if not cross:
        raise ValueError("no planted cross-language pairs in the records")
    planted_sims = [float(index.vector(a) @ index.vector(b)) for a, b in cross]

    languages = np.array(index.languages)
    random_sims = []
    attempts = 0
    while len(random_sims) < samples and attempts < 20 * samples:
        attempts += 1
        i, j = rng.choice(len(index), size=2, replace=False)
        if languages[i] != languages[j]:
            random_sims.append(float(index.vectors[i] @ index.vectors[j]))
    if not random_sims:
        raise ValueError("no random cross-language pairs sampled")
    planted_mean = float(np.mean(planted_sims))
    random_mean = float(np.mean(random_sims))
    return {"planted_mean": planted_mean, "random_mean": random_mean, "gap": planted_mean - random_mean,
            "planted_pairs": len(cross)}

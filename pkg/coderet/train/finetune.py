"""Supervised fine-tuning on labeled query-code pairs: in-batch and hard negatives."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from coderet.corpus.records import FunctionRecord
from coderet.encoder.losses import contrastive_loss
from coderet.encoder.model import code_features, encode_texts, text_features
from coderet.encoder.optim import OptimizerState, linear_schedule, optimizer_step
from coderet.encoder.params import EncoderParams
from coderet.errors import TrainingError
from coderet.retrieval.evaluate import evaluate
from coderet.retrieval.index import DenseIndex, build_index
from coderet.retrieval.queries import LabeledPair
from coderet.train.batching import Example, PairSampler, to_batch
from coderet.train.ar2 import RoundStats, ar2_finetune
from coderet.train.config import AR2Config, FinetuneConfig

logger = logging.getLogger(__name__)


@dataclass
class HardNegatives:
    query_id: str
    negative_ids: List[str]


def query_examples(labeled_pairs: Sequence[LabeledPair], corpus: Sequence[FunctionRecord]) -> Dict[str, List[Example]]:
    """One group per query, one option per gold function found in the corpus."""
    by_id = {r.id: r for r in corpus}
    groups = {}
    for pair in labeled_pairs:
        tokens = tuple(text_features(pair.query))
        options = [Example(pair.query_id, pair.query_id, g, tokens, tuple(code_features(by_id[g])), by_id[g].language)
                   for g in pair.gold_ids if g in by_id]
        if tokens and options:
            groups[pair.query_id] = options
    return groups


def _sampler(labeled_pairs, corpus, config: FinetuneConfig) -> PairSampler:
    groups = query_examples(labeled_pairs, corpus)
    if len(groups) < 2:
        raise TrainingError(f"need at least 2 labeled queries with known gold functions, got {len(groups)}")
    return PairSampler(groups, "query_code", config.batch_size, config.seed, hybrid=False)


def finetune_in_batch(
    params: EncoderParams,
    labeled_pairs: Sequence[LabeledPair],
    corpus: Sequence[FunctionRecord],
    config: FinetuneConfig,
    losses: Optional[List[float]] = None,
) -> EncoderParams:
    """Contrastive fine-tuning where the other codes of the batch are the negatives."""
    sampler = _sampler(labeled_pairs, corpus, config)
    state = OptimizerState()
    for step in tqdm(range(1, config.steps + 1), desc="🎯 Fine-tuning (in-batch)"):
        batch = sampler.next_batch(step)
        loss, grads = contrastive_loss(params, batch, config.temperature)
        lr = config.lr * linear_schedule(step - 1, config.steps, config.warmup_steps)
        params, state = optimizer_step(params, grads, state, lr, config.weight_decay)
        if losses is not None:
            losses.append(loss)
    logger.info(f"In-batch fine-tuning done ({config.steps} steps)")
    return params


def mine_hard_negatives(
    params: EncoderParams,
    labeled_pairs: Sequence[LabeledPair],
    index: DenseIndex,
    k: int,
) -> List[HardNegatives]:
    """
    For each query, the k best-scoring pool members that are not gold. A pool with
    fewer than k + 1 members yields every non-gold member.
    """
    if not labeled_pairs:
        return []
    vectors = encode_texts(params, [p.query for p in labeled_pairs])
    mined = []
    for pair, vec in zip(labeled_pairs, vectors):
        gold = set(pair.gold_ids)
        hits = index.search(vec, k + len(gold))
        mined.append(HardNegatives(pair.query_id, [fid for fid, _ in hits if fid not in gold][:k]))
    return mined


def finetune_hard_negative(
    params: EncoderParams,
    labeled_pairs: Sequence[LabeledPair],
    corpus: Sequence[FunctionRecord],
    config: FinetuneConfig,
    losses: Optional[List[float]] = None,
) -> EncoderParams:
    """
    In-batch fine-tuning plus k retrieved hard negatives per query; negatives are
    re-mined every refresh_every steps with the current weights.
    """
    sampler = _sampler(labeled_pairs, corpus, config)
    code_tokens = {r.id: code_features(r) for r in corpus}
    gold_of = {p.query_id: set(p.gold_ids) for p in labeled_pairs}
    state = OptimizerState()
    negatives: Dict[str, List[str]] = {}

    for step in tqdm(range(1, config.steps + 1), desc="🎯 Fine-tuning (hard negatives)"):
        if (step - 1) % config.refresh_every == 0:
            index = build_index(params, corpus)
            negatives = {m.query_id: m.negative_ids
                         for m in mine_hard_negatives(params, labeled_pairs, index, config.hard_negative_k)}
            logger.debug(f"Refreshed hard negatives at step {step}")

        examples = sampler.next_examples(step)
        in_batch = {ex.positive_id for ex in examples}
        for ex in examples:
            in_batch |= gold_of.get(ex.key, set())
        extra = list(dict.fromkeys(n for ex in examples for n in negatives.get(ex.key, []) if n not in in_batch))
        batch = to_batch(examples, "query_code", negatives=[code_tokens[n] for n in extra])

        loss, grads = contrastive_loss(params, batch, config.temperature)
        lr = config.lr * linear_schedule(step - 1, config.steps, config.warmup_steps)
        params, state = optimizer_step(params, grads, state, lr, config.weight_decay)
        if losses is not None:
            losses.append(loss)
    logger.info(f"Hard-negative fine-tuning done ({config.steps} steps, k={config.hard_negative_k})")
    return params


def training_mrr(params: EncoderParams, labeled_pairs: Sequence[LabeledPair], corpus: Sequence[FunctionRecord]) -> float:
    return evaluate(params, build_index(params, corpus), labeled_pairs).mrr


def _keep_if_better(warm: EncoderParams, tuned: EncoderParams, labeled_pairs, corpus, stage: str) -> EncoderParams:
    before = training_mrr(warm, labeled_pairs, corpus)
    after = training_mrr(tuned, labeled_pairs, corpus)
    if after > before:
        logger.info(f"{stage}: training MRR {before:.4f} → {after:.4f}")
        return tuned
    logger.info(f"{stage} did not improve training MRR ({before:.4f} → {after:.4f}), keeping its warm start")
    return warm


def finetune(
    params: EncoderParams,
    labeled_pairs: Sequence[LabeledPair],
    corpus: Sequence[FunctionRecord],
    config: FinetuneConfig,
    ar2_config: Optional[AR2Config] = None,
    stats: Optional[List[RoundStats]] = None,
) -> EncoderParams:
    """
    Run the strategy named in config. The strategies build on each other: every one
    starts with in-batch fine-tuning, "hardneg" continues it with mined hard
    negatives and "ar2" continues that with the adversarial rounds (ar2_config, or
    defaults seeded like config). A continuation replaces its warm start only if it
    ranks the training queries strictly better.
    """
    tuned = finetune_in_batch(params, labeled_pairs, corpus, config)
    if config.strategy == "inbatch":
        return tuned
    tuned = _keep_if_better(tuned, finetune_hard_negative(tuned, labeled_pairs, corpus, config),
                            labeled_pairs, corpus, "Hard-negative stage")
    if config.strategy == "hardneg":
        return tuned
    ar2 = ar2_config or AR2Config(seed=config.seed)
    return _keep_if_better(tuned, ar2_finetune(tuned, None, labeled_pairs, corpus, ar2, stats=stats),
                           labeled_pairs, corpus, "AR2 stage")

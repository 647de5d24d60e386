"""
Adversarial retriever-ranker fine-tuning.

Each round: the retriever G samples negatives from its own top candidates, the
CrossModel ranker D learns to rank the gold code above them, then G is pulled
towards D's distribution over every candidate group (plus a supervised
contrastive term on the same candidates).
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit
from tqdm import tqdm

from coderet import config as app_config
from coderet.corpus.records import FunctionRecord
from coderet.encoder.losses import Batch, contrastive_loss, distillation_loss
from coderet.encoder.model import add_grads, code_features, encode_texts, text_features
from coderet.encoder.optim import OptimizerState, linear_schedule, optimizer_step
from coderet.encoder.params import EncoderParams
from coderet.errors import TrainingError
from coderet.pairmine.cross_model import CrossModelParams, cross_backward, cross_logits
from coderet.retrieval.index import build_index
from coderet.retrieval.queries import LabeledPair
from coderet.train.config import AR2Config
from coderet.utils import child_rng

logger = logging.getLogger(__name__)

DEGENERATE_STD = 1e-8


@dataclass
class RoundStats:
    round: int
    d_loss: Optional[float] = None
    d_accuracy: Optional[float] = None
    g_loss: Optional[float] = None
    aborted: bool = False
    reason: str = ""


@dataclass
class Group:
    query_id: str
    query: List[str]
    gold_id: str
    negative_ids: List[str]


def sample_generator_negatives(
    params_g: EncoderParams,
    labeled_pairs: Sequence[LabeledPair],
    corpus: Sequence[FunctionRecord],
    ar2: AR2Config,
    rng: np.random.Generator,
) -> List[Group]:
    """Retrieve a pool of pool_size non-gold codes per query with G and sample negative_size of them."""
    index = build_index(params_g, corpus)
    known = {r.id for r in corpus}
    vectors = encode_texts(params_g, [p.query for p in labeled_pairs])
    groups = []
    for pair, vec in zip(labeled_pairs, vectors):
        golds = [g for g in pair.gold_ids if g in known]
        tokens = text_features(pair.query)
        if not golds or not tokens:
            continue
        gold_set = set(pair.gold_ids)
        pool = [fid for fid, _ in index.search(vec, ar2.pool_size + len(gold_set)) if fid not in gold_set]
        pool = pool[:ar2.pool_size]
        if not pool:
            continue
        picks = rng.choice(len(pool), size=min(ar2.negative_size, len(pool)), replace=False)
        gold = golds[int(rng.integers(len(golds)))]
        groups.append(Group(pair.query_id, tokens, gold, [pool[i] for i in picks]))

    if not groups:
        raise TrainingError("no query has both a gold function and candidate negatives")
    size = min(len(g.negative_ids) for g in groups)
    for g in groups:
        g.negative_ids = g.negative_ids[:size]
    return groups


def _group_inputs(groups: Sequence[Group], code_tokens: Dict[str, List[str]]):
    lefts, rights = [], []
    for g in groups:
        for fid in [g.gold_id] + g.negative_ids:
            lefts.append(g.query)
            rights.append(code_tokens[fid])
    return lefts, rights


def discriminator_logits(params_d: CrossModelParams, groups, code_tokens) -> np.ndarray:
    """Raw D scores, shape [len(groups), 1 + K]; column 0 is the gold."""
    lefts, rights = _group_inputs(groups, code_tokens)
    logits, _ = cross_logits(params_d, lefts, rights)
    return logits.reshape(len(groups), -1)


def ranking_loss(params_d: CrossModelParams, groups, code_tokens):
    """Pairwise logistic loss log(1 + exp(-(s_gold - s_neg))) averaged over all (gold, negative) pairs."""
    lefts, rights = _group_inputs(groups, code_tokens)
    logits, cache = cross_logits(params_d, lefts, rights)
    scores = logits.reshape(len(groups), -1)
    margins = scores[:, :1] - scores[:, 1:]
    count = margins.size
    loss = float(np.mean(np.logaddexp(0.0, -margins)))
    weight = expit(-margins) / count
    d_scores = np.zeros_like(scores)
    d_scores[:, 0] = -weight.sum(axis=1)
    d_scores[:, 1:] = weight
    return loss, cross_backward(params_d, cache, d_scores.reshape(-1))


def ranking_accuracy(
    params_d: CrossModelParams,
    labeled_pairs: Sequence[LabeledPair],
    corpus: Sequence[FunctionRecord],
    rng: np.random.Generator,
) -> float:
    """Share of queries where D scores a gold code above a random non-gold code."""
    code_tokens = {r.id: code_features(r) for r in corpus}
    ids = sorted(code_tokens)
    lefts, rights = [], []
    for pair in labeled_pairs:
        gold_set = set(pair.gold_ids)
        golds = [g for g in pair.gold_ids if g in code_tokens]
        others = [i for i in ids if i not in gold_set]
        if not golds or not others:
            continue
        query = text_features(pair.query)
        lefts += [query, query]
        rights += [code_tokens[golds[0]], code_tokens[others[int(rng.integers(len(others)))]]]
    if not lefts:
        raise TrainingError("no query to measure ranking accuracy on")
    logits, _ = cross_logits(params_d, lefts, rights)
    pairs = logits.reshape(-1, 2)
    return float(np.mean(pairs[:, 0] > pairs[:, 1]))


def train_discriminator(params_d, groups, code_tokens, ar2: AR2Config, rng) -> Tuple[CrossModelParams, float]:
    state = OptimizerState()
    losses = []
    for _ in tqdm(range(ar2.d_steps), desc="⚖️ AR2 ranker", leave=False):
        picks = rng.choice(len(groups), size=min(ar2.batch_size, len(groups)), replace=False)
        loss, grads = ranking_loss(params_d, [groups[i] for i in picks], code_tokens)
        params_d, state = optimizer_step(params_d, grads, state, ar2.d_lr, ar2.weight_decay)
        losses.append(loss)
    return params_d, float(np.mean(losses)) if losses else float("nan")


def generator_step_grads(params_g, params_d, groups, code_tokens, ar2: AR2Config):
    """Distillation towards D plus the weighted supervised contrastive loss, for one batch of groups."""
    target = discriminator_logits(params_d, groups, code_tokens)
    candidates = [[code_tokens[fid] for fid in [g.gold_id] + g.negative_ids] for g in groups]
    loss, grads = distillation_loss(params_g, [g.query for g in groups], candidates, target, ar2.temperature)

    if ar2.g_supervised_weight > 0 and len(groups) >= 2:
        golds = {g.gold_id for g in groups}
        negatives = list(dict.fromkeys(n for g in groups for n in g.negative_ids if n not in golds))
        batch = Batch(
            anchors=[g.query for g in groups],
            positives=[code_tokens[g.gold_id] for g in groups],
            modality="query_code",
            negatives=[code_tokens[n] for n in negatives],
        )
        sup_loss, sup_grads = contrastive_loss(params_g, batch, ar2.temperature)
        loss += ar2.g_supervised_weight * sup_loss
        grads = add_grads(grads, {k: ar2.g_supervised_weight * v for k, v in sup_grads.items()})
    return loss, grads


def ar2_finetune(
    params_g: EncoderParams,
    params_d: Optional[CrossModelParams],
    labeled_pairs: Sequence[LabeledPair],
    corpus: Sequence[FunctionRecord],
    ar2: AR2Config,
    stats: Optional[List[RoundStats]] = None,
) -> EncoderParams:
    """
    Alternate ranker and retriever training for ar2.rounds rounds. D starts fresh over
    G's vocabulary when params_d is None, as a lexical-overlap scorer. A round whose
    D scores are constant is aborted before G is updated.
    """
    rng = child_rng(ar2.seed, "ar2")
    if params_d is None:
        params_d = CrossModelParams.initialize(
            params_g.vocab, ar2.d_dim, child_rng(ar2.seed, "ar2", "d_init"),
            embed_scale=app_config.CROSS_EMBED_SCALE, lexical_weight=app_config.CROSS_LEXICAL_PRIOR,
        )
    code_tokens = {r.id: code_features(r) for r in corpus}
    total_g = ar2.rounds * ar2.g_steps
    warmup = int(ar2.warmup_proportion * total_g)
    g_state = OptimizerState()
    g_step = 0

    for round_no in range(1, ar2.rounds + 1):
        round_stats = RoundStats(round=round_no)
        groups = sample_generator_negatives(params_g, labeled_pairs, corpus, ar2, rng)

        params_d, round_stats.d_loss = train_discriminator(params_d, groups, code_tokens, ar2, rng)
        round_stats.d_accuracy = ranking_accuracy(params_d, labeled_pairs, corpus, child_rng(ar2.seed, "ar2", round_no))
        spread = float(np.std(discriminator_logits(params_d, groups, code_tokens)))
        if spread < DEGENERATE_STD:
            round_stats.aborted = True
            round_stats.reason = f"ranker scores are constant (std={spread:.2e}) over {len(groups)} groups"
            logger.warning(f"AR2 round {round_no} aborted: {round_stats.reason}")
            if stats is not None:
                stats.append(round_stats)
            continue

        g_losses = []
        for _ in tqdm(range(ar2.g_steps), desc=f"🔁 AR2 round {round_no} retriever", leave=False):
            if g_step > 0 and g_step % ar2.refresh_every == 0:
                groups = sample_generator_negatives(params_g, labeled_pairs, corpus, ar2, rng)
            picks = rng.choice(len(groups), size=min(ar2.batch_size, len(groups)), replace=False)
            loss, grads = generator_step_grads(params_g, params_d, [groups[i] for i in picks], code_tokens, ar2)
            lr = ar2.g_lr * linear_schedule(g_step, total_g, warmup)
            params_g, g_state = optimizer_step(params_g, grads, g_state, lr, ar2.weight_decay)
            g_losses.append(loss)
            g_step += 1
        round_stats.g_loss = float(np.mean(g_losses)) if g_losses else None
        logger.info(f"AR2 round {round_no}: ranker loss {round_stats.d_loss:.4f}, "
                    f"ranker accuracy {round_stats.d_accuracy:.3f}")
        if stats is not None:
            stats.append(round_stats)
    return params_g

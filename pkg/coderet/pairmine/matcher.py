"""
NameMatcher / DocMatcher: text encoders trained without labels (two token-dropout
views of the same text are positives), then used to mine candidate code-code pairs.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from coderet import config as app_config
from coderet.corpus.records import FunctionRecord
from coderet.encoder.losses import Batch, contrastive_loss
from coderet.encoder.model import drop_tokens, encode_texts, text_features
from coderet.encoder.optim import OptimizerState, optimizer_step
from coderet.encoder.params import EncoderParams, build_vocab
from coderet.errors import MiningError
from coderet.pairmine.pairs import MiningConfig, TrainingPair
from coderet.utils import child_rng

logger = logging.getLogger(__name__)

FIELD_SOURCES = {"name_normalized": "name_match", "doc": "doc_match"}


def train_matcher(
    texts: Sequence[str],
    config: MiningConfig,
    losses: Optional[List[float]] = None,
    label: str = "matcher",
) -> EncoderParams:
    """
    Train a text encoder on `texts` alone. Duplicate texts are treated as distinct
    instances. Per-step losses are appended to `losses` when given.
    """
    batch_size = config.matcher_batch_size
    if len(texts) < 2 * batch_size:
        raise MiningError(f"{label}: need at least {2 * batch_size} texts, got {len(texts)}")

    rng = child_rng(config.seed, "matcher", label)
    token_lists = [text_features(t) or [app_config.UNK_TOKEN] for t in texts]
    params = EncoderParams.initialize(build_vocab(token_lists), config.matcher_dim, rng)
    state = OptimizerState()
    temperature = 1.0 / config.matcher_temperature

    n = len(token_lists)
    for epoch in range(config.matcher_epochs):
        order = rng.permutation(n)
        starts = range(0, n, batch_size)
        for start in tqdm(starts, desc=f"🔤 {label} epoch {epoch + 1}", leave=False):
            idx = order[start:start + batch_size]
            if len(idx) < 2:
                continue
            batch = Batch(
                anchors=[drop_tokens(token_lists[i], config.token_dropout, rng) for i in idx],
                positives=[drop_tokens(token_lists[i], config.token_dropout, rng) for i in idx],
                modality="text_text",
            )
            loss, grads = contrastive_loss(params, batch, temperature)
            params, state = optimizer_step(params, grads, state, config.matcher_lr, config.weight_decay)
            if losses is not None:
                losses.append(loss)
        logger.debug(f"{label} epoch {epoch + 1}: step {state.step}")

    logger.info(f"Trained {label} on {n} texts ({state.step} steps, {state.skipped} skipped)")
    return params


def mine_candidate_pairs(
    corpus: Sequence[FunctionRecord],
    matcher: EncoderParams,
    field: str,
    config: MiningConfig,
) -> List[TrainingPair]:
    """
    Exact top-k neighbours of every function by matcher cosine over `field`;
    pairs scoring above tau1 are kept once, lower id on the left.
    """
    if field not in FIELD_SOURCES:
        raise MiningError(f"cannot mine on field '{field}'")
    source = FIELD_SOURCES[field]

    records = [r for r in corpus if getattr(r, field, None)]
    skipped = len(corpus) - len(records)
    if skipped:
        logger.debug(f"{skipped} records without {field} skipped")
    if len(records) < 2:
        return []

    vectors = encode_texts(matcher, [getattr(r, field) for r in records])
    scores = np.clip(vectors @ vectors.T, -1.0, 1.0)
    ids = [r.id for r in records]
    id_rank = np.argsort(np.argsort(ids, kind="stable"), kind="stable")

    found = {}
    for i in range(len(records)):
        row = scores[i].copy()
        row[i] = -np.inf
        order = np.lexsort((id_rank, -row))[:config.top_k]
        for j in order:
            if j == i or row[j] <= config.tau1:
                continue
            a, b = (records[i], records[j]) if ids[i] < ids[j] else (records[j], records[i])
            found[(a.id, b.id)] = TrainingPair(
                left_id=a.id,
                right_id=b.id,
                modality="code_code",
                source=source,
                match_score=float(row[j]),
                left_language=a.language,
                right_language=b.language,
            )

    pairs = [found[key] for key in sorted(found)]
    logger.info(f"Mined {len(pairs)} {source} candidates above tau1={config.tau1}")
    return pairs

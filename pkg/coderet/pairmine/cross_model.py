"""
CrossModel: a joint-input scorer over two token sequences.

score(a, b) = sigmoid(mean_a^T W_sym mean_b + w_lex * jaccard(a, b) + bias)

It denoises mined code-code pairs and serves as the discriminator of the
adversarial fine-tuning loop. For denoising both sides are content tokens: the
code tokens minus language keywords, numbers and one-letter names, so two
languages compare on the identifiers they share.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.special import expit
from sklearn.metrics import accuracy_score
from sklearn.model_selection import train_test_split
from tqdm import tqdm

from coderet import config as app_config
from coderet.corpus.records import FunctionRecord
from coderet.encoder.model import code_features
from coderet.encoder.optim import OptimizerState, optimizer_step
from coderet.encoder.params import build_vocab
from coderet.errors import MiningError
from coderet.pairmine.pairs import MiningConfig, TrainingPair
from coderet.utils import child_rng

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class CrossModelParams:
    vocab: Dict[str, int]
    embed: np.ndarray
    interaction: np.ndarray
    lexical_weight: np.ndarray
    bias: np.ndarray

    PARAM_NAMES = ("embed", "interaction", "lexical_weight", "bias")

    @classmethod
    def initialize(
        cls, vocab: Dict[str, int], dim: int, rng: np.random.Generator,
        embed_scale: float = 0.5, lexical_weight: float = 1.0, bias: float = 0.0,
    ) -> "CrossModelParams":
        return cls(
            vocab=dict(vocab),
            embed=rng.normal(0.0, embed_scale, size=(len(vocab), dim)),
            interaction=0.1 * np.eye(dim),
            lexical_weight=np.full(1, float(lexical_weight)),
            bias=np.full(1, float(bias)),
        )

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.PARAM_NAMES}

    def replace(self, **arrays) -> "CrossModelParams":
        return dataclasses.replace(self, **arrays)


def content_tokens(record_or_tokens) -> List[str]:
    return [t for t in code_features(record_or_tokens)
            if len(t) > 1 and not t[0].isdigit() and t not in app_config.CODE_KEYWORDS]


def jaccard(a: Sequence[str], b: Sequence[str]) -> float:
    sa, sb = set(a), set(b)
    union = sa | sb
    return len(sa & sb) / len(union) if union else 0.0


def _pool(params: CrossModelParams, token_lists: Sequence[Sequence[str]]):
    unk = params.vocab[app_config.UNK_TOKEN]
    id_lists = [np.array([params.vocab.get(t, unk) for t in tokens] or [unk], dtype=np.int64)
                for tokens in token_lists]
    lengths = np.array([ids.size for ids in id_lists], dtype=np.int64)
    flat = np.concatenate(id_lists)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    means = np.add.reduceat(params.embed[flat], offsets, axis=0) / lengths[:, None]
    return flat, lengths, means


def cross_logits(params: CrossModelParams, lefts, rights):
    """Raw (pre-sigmoid) scores of aligned left/right token lists, plus a cache for cross_backward."""
    if len(lefts) != len(rights):
        raise MiningError("left and right inputs differ in length")
    flat_a, len_a, m_a = _pool(params, lefts)
    flat_b, len_b, m_b = _pool(params, rights)
    sym = (params.interaction + params.interaction.T) / 2
    lexical = np.array([jaccard(a, b) for a, b in zip(lefts, rights)])
    logits = np.sum((m_a @ sym) * m_b, axis=1) + params.lexical_weight[0] * lexical + params.bias[0]
    cache = (flat_a, len_a, m_a, flat_b, len_b, m_b, sym, lexical)
    return logits, cache


def cross_backward(params: CrossModelParams, cache, d_logits: np.ndarray) -> Dict[str, np.ndarray]:
    flat_a, len_a, m_a, flat_b, len_b, m_b, sym, lexical = cache
    g = (m_a * d_logits[:, None]).T @ m_b
    d_embed = np.zeros_like(params.embed)
    d_ma = d_logits[:, None] * (m_b @ sym)
    d_mb = d_logits[:, None] * (m_a @ sym)
    np.add.at(d_embed, flat_a, np.repeat(d_ma / len_a[:, None], len_a, axis=0))
    np.add.at(d_embed, flat_b, np.repeat(d_mb / len_b[:, None], len_b, axis=0))
    return {
        "embed": d_embed,
        "interaction": (g + g.T) / 2,
        "lexical_weight": np.array([np.sum(d_logits * lexical)]),
        "bias": np.array([np.sum(d_logits)]),
    }


def cross_scores(params: CrossModelParams, lefts, rights) -> np.ndarray:
    if len(lefts) == 0:
        return np.zeros(0)
    logits, _ = cross_logits(params, lefts, rights)
    return expit(logits)


def fit_logistic(
    params: CrossModelParams,
    lefts, rights, labels: np.ndarray,
    epochs: int, batch_size: int, lr: float, weight_decay: float,
    rng: np.random.Generator,
    desc: str = "⚖️ CrossModel",
) -> CrossModelParams:
    """Minimize binary cross-entropy of sigmoid(score) against labels with AdamW."""
    state = OptimizerState()
    n = len(labels)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in tqdm(range(0, n, batch_size), desc=desc, leave=False):
            idx = order[start:start + batch_size]
            logits, cache = cross_logits(params, [lefts[i] for i in idx], [rights[i] for i in idx])
            d_logits = (expit(logits) - labels[idx]) / len(idx)
            params, state = optimizer_step(params, cross_backward(params, cache, d_logits), state, lr, weight_decay)
    return params


def sample_negative_pairs(
    ids: Sequence[str],
    count: int,
    rng: np.random.Generator,
    exclude: Optional[Set[Tuple[str, str]]] = None,
) -> List[Tuple[str, str]]:
    """Random unordered pairs of distinct ids (lower id first) outside `exclude`."""
    exclude = exclude or set()
    if len(ids) < 2 or count <= 0:
        return []
    negatives = []
    attempts = 0
    while len(negatives) < count and attempts < 50 * count:
        attempts += 1
        i, j = rng.choice(len(ids), size=2, replace=False)
        key = (ids[i], ids[j]) if ids[i] < ids[j] else (ids[j], ids[i])
        if key in exclude:
            continue
        negatives.append(key)
    if len(negatives) < count:
        logger.warning(f"Only sampled {len(negatives)} of {count} negative pairs")
    return negatives


def train_cross_model(
    doc_pairs: Sequence[TrainingPair],
    corpus: Sequence[FunctionRecord],
    config: MiningConfig,
    stats: Optional[Dict] = None,
) -> CrossModelParams:
    """
    Fit the CrossModel with the doc-matched pairs as positives and negative_ratio
    random pairs per positive as negatives (sampled once). A stratified 20% split
    is held out to report accuracy in `stats`.
    """
    if not doc_pairs:
        raise MiningError("no doc-matched pairs to train the CrossModel on")
    by_id = {r.id: r for r in corpus}
    positives = [(p.left_id, p.right_id) for p in doc_pairs if p.left_id in by_id and p.right_id in by_id]
    if not positives:
        raise MiningError("doc-matched pairs reference no known functions")

    rng = child_rng(config.seed, "cross_model")
    features = {r.id: content_tokens(r) for r in corpus}
    ids = sorted(by_id)
    negatives = sample_negative_pairs(ids, config.negative_ratio * len(positives), rng, exclude=set(positives))

    examples = positives + negatives
    labels = np.array([1.0] * len(positives) + [0.0] * len(negatives))
    lefts = [features[a] for a, _ in examples]
    rights = [features[b] for _, b in examples]

    indices = np.arange(len(examples))
    if len(examples) >= 10 and min(len(positives), len(negatives)) >= 2:
        train_idx, test_idx = train_test_split(indices, test_size=0.2, random_state=config.seed, stratify=labels)
    else:
        train_idx, test_idx = indices, indices

    params = CrossModelParams.initialize(
        build_vocab(features.values()), config.cross_dim, rng,
        embed_scale=app_config.CROSS_EMBED_SCALE,
        lexical_weight=app_config.CROSS_LEXICAL_PRIOR,
        bias=app_config.CROSS_BIAS_PRIOR,
    )
    params = fit_logistic(
        params,
        [lefts[i] for i in train_idx], [rights[i] for i in train_idx], labels[train_idx],
        config.cross_epochs, config.cross_batch_size, config.cross_lr, config.weight_decay, rng,
    )

    predicted = cross_scores(params, [lefts[i] for i in test_idx], [rights[i] for i in test_idx]) > 0.5
    accuracy = float(accuracy_score(labels[test_idx].astype(int), predicted.astype(int)))
    logger.info(f"CrossModel trained on {len(positives)} positives / {len(negatives)} negatives, "
                f"held-out accuracy {accuracy:.3f}")
    if stats is not None:
        stats.update({"positives": len(positives), "negatives": len(negatives), "heldout_accuracy": accuracy})
    return params


def score_pairs(
    pairs: Sequence[TrainingPair],
    cross_model: CrossModelParams,
    corpus: Sequence[FunctionRecord],
) -> List[TrainingPair]:
    """Copies of `pairs` with denoise_score set by the CrossModel."""
    if not pairs:
        return []
    by_id = {r.id: r for r in corpus}
    lefts = [content_tokens(by_id[p.left_id]) for p in pairs]
    rights = [content_tokens(by_id[p.right_id]) for p in pairs]
    scores = cross_scores(cross_model, lefts, rights)
    return [dataclasses.replace(p, denoise_score=float(s)) for p, s in zip(pairs, scores)]


def filter_by_score(scored: Sequence[TrainingPair], threshold: float) -> List[TrainingPair]:
    return [p for p in scored if p.denoise_score is not None and p.denoise_score > threshold]


def calibrated_threshold(doc_scored: Sequence[TrainingPair], keep_fraction: float) -> float:
    """Threshold that keeps the top `keep_fraction` of doc-matched pair scores."""
    scores = np.array([p.denoise_score for p in doc_scored], dtype=float)
    return float(np.quantile(scores, 1.0 - keep_fraction))


def denoise_pairs(
    candidates: Sequence[TrainingPair],
    cross_model: CrossModelParams,
    corpus: Sequence[FunctionRecord],
    config: MiningConfig,
    threshold: Optional[float] = None,
) -> List[TrainingPair]:
    """Score candidates and keep those above the threshold (tau2 unless given)."""
    threshold = config.tau2 if threshold is None else threshold
    kept = filter_by_score(score_pairs(candidates, cross_model, corpus), threshold)
    logger.info(f"Denoising kept {len(kept)}/{len(candidates)} pairs (threshold {threshold:.4f})")
    return kept

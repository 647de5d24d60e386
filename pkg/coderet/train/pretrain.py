import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from coderet.corpus.records import FunctionRecord
from coderet.encoder.losses import MODALITIES, objective_terms
from coderet.encoder.model import code_features, encode_many, text_features
from coderet.encoder.optim import OptimizerState, linear_schedule, optimizer_step
from coderet.encoder.params import EncoderParams, build_vocab
from coderet.errors import TrainingError
from coderet.pairmine.pairs import TrainingPair, resolve_text
from coderet.retrieval.metrics import alignment, uniformity
from coderet.train.batching import Example, PairSampler
from coderet.train.config import TrainConfig
from coderet.utils import child_rng

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["step", "loss_total", "loss_uni", "loss_bi_doc", "loss_bi_comment", "l_align", "l_uniform"]
TERM_COLUMNS = {"code_code": "loss_uni", "code_doc": "loss_bi_doc", "code_comment": "loss_bi_comment"}


@dataclass
class PretrainResult:
    params: EncoderParams
    metrics: pd.DataFrame
    optimizer: OptimizerState
    batch_log: List[Tuple[int, str, List[str]]] = field(default_factory=list)  # (step, modality, languages)


def build_encoder_vocab(corpus: Sequence[FunctionRecord], extra_texts: Iterable[str] = (),
                        max_size: int = None) -> Dict[str, int]:
    """Shared code/text vocabulary over all function bodies, docs and comments."""
    def token_lists():
        for r in corpus:
            yield code_features(r)
            if r.doc:
                yield text_features(r.doc)
            for c in r.comments:
                yield text_features(c)
        for t in extra_texts:
            yield text_features(t)
    return build_vocab(token_lists(), max_size)


def make_examples(pairs: Sequence[TrainingPair], by_id: Dict[str, FunctionRecord]) -> Dict[str, List[Example]]:
    """Group pairs by their anchor key; text-code pairs anchor on the text and group by code."""
    groups: Dict[str, List[Example]] = {}
    unresolved = 0
    for p in pairs:
        right = by_id.get(p.right_id)
        if right is None:
            unresolved += 1
            continue
        if p.modality == "code_code":
            left = by_id.get(p.left_id)
            if left is None:
                unresolved += 1
                continue
            example = Example(p.left_id, p.left_id, p.right_id,
                              tuple(code_features(left)), tuple(code_features(right)), left.language)
        else:
            text = resolve_text(p.left_id, by_id)
            tokens = text_features(text) if text else []
            if not tokens:
                unresolved += 1
                continue
            example = Example(p.right_id, p.left_id, p.right_id, tuple(tokens),
                              tuple(code_features(right)), right.language)
        if example.positive:
            groups.setdefault(example.key, []).append(example)
    if unresolved:
        logger.warning(f"{unresolved} pairs reference unknown functions or empty texts, skipped")
    return groups


class Diagnostics:
    """
    Fixed snapshot of positive pairs. Alignment is tracked over the pairs, uniformity
    over the distinct texts and functions they contain.
    """

    def __init__(self, groups_by_modality: Dict[str, Dict[str, List[Example]]], size: int, seed: int):
        examples = [ex for modality in MODALITIES
                    for key in sorted(groups_by_modality.get(modality, {}))
                    for ex in groups_by_modality[modality][key]]
        rng = child_rng(seed, "diagnostics")
        if len(examples) > size:
            examples = [examples[i] for i in sorted(rng.choice(len(examples), size=size, replace=False))]
        self.anchors = [list(ex.anchor) for ex in examples]
        self.positives = [list(ex.positive) for ex in examples]
        items: Dict[str, List[str]] = {}
        for ex in examples:
            items.setdefault(ex.anchor_id, list(ex.anchor))
            items.setdefault(ex.positive_id, list(ex.positive))
        self.items = [items[key] for key in sorted(items)]

    def measure(self, params: EncoderParams) -> Tuple[float, float]:
        if not self.anchors:
            return float("nan"), float("nan")
        a = encode_many(params, self.anchors)
        p = encode_many(params, self.positives)
        l_uniform = uniformity(encode_many(params, self.items)) if len(self.items) >= 2 else float("nan")
        return alignment(a, p), l_uniform


def pretrain(
    corpus: Sequence[FunctionRecord],
    pairs: Dict[str, Sequence[TrainingPair]],
    config: TrainConfig,
    params: Optional[EncoderParams] = None,
    metrics_path: Optional[str] = None,
) -> PretrainResult:
    """
    Minimize the sum of the unimodal and both bimodal contrastive losses. Each step
    draws one batch per present modality, sized by modality_mix; a modality with a
    zero share or no pairs is absent and contributes nothing.
    """
    by_id = {r.id: r for r in corpus}
    if params is None:
        vocab = build_encoder_vocab(corpus, max_size=config.vocab_size)
        params = EncoderParams.initialize(vocab, config.embed_dim, child_rng(config.seed, "init"))

    groups_by_modality: Dict[str, Dict[str, List[Example]]] = {}
    samplers: Dict[str, PairSampler] = {}
    for modality, share in zip(MODALITIES, config.modality_mix):
        modality_pairs = pairs.get(modality) or []
        if share <= 0 or not modality_pairs:
            continue
        groups = make_examples(modality_pairs, by_id)
        if len(groups) < 2:
            logger.warning(f"{modality}: fewer than 2 usable anchors, term left out")
            continue
        groups_by_modality[modality] = groups
        size = max(2, int(round(config.batch_size * share)))
        samplers[modality] = PairSampler(groups, modality, size, config.seed,
                                         hybrid=config.hybrid_languages, swap_sides=modality == "code_code")
        logger.info(f"{modality}: {len(groups)} anchors, batch size {samplers[modality].batch_size}")
    if not samplers:
        raise TrainingError("no pair corpus available for pre-training")

    diagnostics = Diagnostics(groups_by_modality, config.diagnostic_pairs, config.seed)
    state = OptimizerState()
    rows = []
    batch_log = []
    window: Dict[str, List[float]] = {m: [] for m in samplers}

    for step in tqdm(range(1, config.steps + 1), desc="🏋️ Pre-training"):
        batches = {m: s.next_batch(step) for m, s in samplers.items()}
        for m, b in batches.items():
            batch_log.append((step, m, list(b.languages)))
        terms, grads = objective_terms(params, batches, config.temperature)
        lr = config.lr * linear_schedule(step - 1, config.steps, config.warmup_steps)
        params, state = optimizer_step(params, grads, state, lr, config.weight_decay)
        for m, value in terms.items():
            window[m].append(value)

        if step == 1 or step % config.log_every == 0 or step == config.steps:
            l_align, l_uniform = diagnostics.measure(params)
            row = {"step": step, "l_align": l_align, "l_uniform": l_uniform}
            total = 0.0
            for m in MODALITIES:
                if m in window and window[m]:
                    row[TERM_COLUMNS[m]] = float(np.mean(window[m]))
                    total += row[TERM_COLUMNS[m]]
                else:
                    row[TERM_COLUMNS[m]] = float("nan")
            row["loss_total"] = total
            rows.append(row)
            window = {m: [] for m in samplers}
            logger.debug(f"step {step}: loss {total:.4f} align {l_align:.4f} uniform {l_uniform:.4f}")

    metrics = pd.DataFrame(rows, columns=METRIC_COLUMNS)
    if metrics_path:
        metrics.to_csv(metrics_path, index=False)
    logger.info(f"Pre-training finished after {config.steps} steps "
                f"(loss {metrics['loss_total'].iloc[0]:.4f} → {metrics['loss_total'].iloc[-1]:.4f}, "
                f"{state.skipped} skipped updates)")
    return PretrainResult(params=params, metrics=metrics, optimizer=state, batch_log=batch_log)

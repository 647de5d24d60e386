"""
In-batch contrastive objectives with closed-form gradients.

Similarities are scaled by multiplying with the temperature: logits = tau * cos.
A "temperature 0.05" in the dividing convention is tau = 20 here.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from coderet.encoder.model import add_grads, backward, forward
from coderet.encoder.params import EncoderParams
from coderet.errors import EncoderError

MODALITIES = ("code_code", "code_doc", "code_comment")
# Matcher (text-text) and fine-tuning (query-code) batches reuse the same loss.
BATCH_MODALITIES = MODALITIES + ("text_text", "query_code")


@dataclass
class Batch:
    """
    Anchors and their positives as token lists. Row i of positives is the positive
    of anchor i and a negative for every other anchor; optional explicit negatives
    join the candidate set of every anchor.
    """
    anchors: List[List[str]]
    positives: List[List[str]]
    modality: str
    languages: List[str] = field(default_factory=list)
    negatives: List[List[str]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.anchors) != len(self.positives):
            raise EncoderError(f"{len(self.anchors)} anchors but {len(self.positives)} positives")
        if self.modality not in BATCH_MODALITIES:
            raise EncoderError(f"unknown modality '{self.modality}'")

    def __len__(self):
        return len(self.anchors)


def info_nce(anchors: np.ndarray, candidates: np.ndarray, temperature: float):
    """
    Mean over rows of -log softmax(tau * anchors @ candidates.T)[i, i].
    Returns (loss, d_anchors, d_candidates).
    """
    n = anchors.shape[0]
    logits = temperature * anchors @ candidates.T
    diag = np.arange(n)
    loss = float(np.mean(logsumexp(logits, axis=1) - logits[diag, diag]))
    d_logits = softmax(logits, axis=1)
    d_logits[diag, diag] -= 1.0
    d_sim = temperature * d_logits / n
    return loss, d_sim @ candidates, d_sim.T @ anchors


def contrastive_loss(params: EncoderParams, batch: Batch, temperature: float) -> Tuple[float, Dict[str, np.ndarray]]:
    """Contrastive loss of one batch with in-batch (plus any explicit) negatives, and its gradients."""
    n = len(batch)
    if n < 2:
        raise EncoderError(f"contrastive loss needs at least 2 pairs, got {n}")
    if temperature <= 0:
        raise EncoderError(f"temperature must be positive, got {temperature}")

    token_lists = list(batch.anchors) + list(batch.positives) + list(batch.negatives)
    encoded, cache = forward(params, token_lists)
    anchors, candidates = encoded[:n], encoded[n:]
    loss, d_anchors, d_candidates = info_nce(anchors, candidates, temperature)
    grads = backward(params, cache, np.vstack([d_anchors, d_candidates]))
    return loss, grads


def objective_terms(
    params: EncoderParams,
    batches: Dict[str, Optional[Batch]],
    temperature: float,
) -> Tuple[Dict[str, float], Dict[str, np.ndarray]]:
    """Per-modality losses of the present batches and the summed gradient."""
    terms = {}
    total_grads = None
    for modality in MODALITIES:
        batch = batches.get(modality)
        if batch is None:
            continue
        loss, grads = contrastive_loss(params, batch, temperature)
        terms[modality] = loss
        total_grads = add_grads(total_grads, grads)
    if not terms:
        raise EncoderError("every objective term is absent")
    return terms, total_grads


def total_loss(
    params: EncoderParams,
    uni_batch: Optional[Batch],
    doc_batch: Optional[Batch],
    comment_batch: Optional[Batch],
    temperature: float = 1.0,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """Unimodal + doc bimodal + comment bimodal loss; an absent batch contributes zero."""
    terms, grads = objective_terms(
        params,
        {"code_code": uni_batch, "code_doc": doc_batch, "code_comment": comment_batch},
        temperature,
    )
    return float(sum(terms.values())), grads


def kl_to_target(student_logits: np.ndarray, target_logits: np.ndarray):
    """
    Mean over rows of KL(softmax(target) || softmax(student)).
    Returns (loss, d_student_logits).
    """
    p_target = softmax(target_logits, axis=1)
    log_p_target = target_logits - logsumexp(target_logits, axis=1, keepdims=True)
    log_p_student = student_logits - logsumexp(student_logits, axis=1, keepdims=True)
    rows = student_logits.shape[0]
    loss = float(np.sum(p_target * (log_p_target - log_p_student)) / rows)
    return loss, (np.exp(log_p_student) - p_target) / rows


def distillation_loss(
    params: EncoderParams,
    queries: Sequence[Sequence[str]],
    candidates: Sequence[Sequence[Sequence[str]]],
    target_scores: np.ndarray,
    temperature: float,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Pull the encoder's softmax over each query's candidate group towards the
    distribution of the ranker scores. candidates has shape [B][K]; target_scores is [B, K].
    """
    b = len(queries)
    k = len(candidates[0]) if b else 0
    if b == 0 or k < 2:
        raise EncoderError("distillation needs at least one query with two candidates")
    if any(len(group) != k for group in candidates):
        raise EncoderError("candidate groups must have equal size")
    target_scores = np.asarray(target_scores, dtype=float)
    if target_scores.shape != (b, k):
        raise EncoderError(f"target scores shape {target_scores.shape} != ({b}, {k})")

    flat = [tokens for group in candidates for tokens in group]
    encoded, cache = forward(params, list(queries) + flat)
    q = encoded[:b]
    c = encoded[b:].reshape(b, k, -1)
    logits = temperature * np.einsum("bd,bkd->bk", q, c)
    loss, d_logits = kl_to_target(logits, target_scores)
    d_sim = temperature * d_logits
    d_q = np.einsum("bk,bkd->bd", d_sim, c)
    d_c = d_sim[:, :, None] * q[:, None, :]
    grads = backward(params, cache, np.vstack([d_q, d_c.reshape(b * k, -1)]))
    return loss, grads

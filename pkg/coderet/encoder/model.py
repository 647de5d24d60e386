"""
Forward and backward passes of the encoder:
mean-pooled token embeddings -> affine projection -> tanh -> L2 normalization.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from coderet import config as app_config
from coderet.corpus.records import FunctionRecord
from coderet.corpus.tokens import tokenize_code, tokenize_text
from coderet.encoder.params import EncoderParams
from coderet.errors import EncoderError

NORM_EPS = 1e-12


def text_features(text: str, max_len: int = None) -> List[str]:
    return tokenize_text(text)[:max_len or app_config.MAX_TEXT_LEN]


def code_features(record_or_tokens, max_len: int = None) -> List[str]:
    tokens = record_or_tokens.code_tokens if isinstance(record_or_tokens, FunctionRecord) else record_or_tokens
    return tokenize_code(tokens)[:max_len or app_config.MAX_CODE_LEN]


def drop_tokens(tokens: Sequence, p: float, rng: np.random.Generator) -> list:
    """Drop each token with probability p; if nothing survives the input is returned unchanged."""
    if p <= 0 or len(tokens) == 0:
        return list(tokens)
    keep = rng.random(len(tokens)) >= p
    if not keep.any():
        return list(tokens)
    return [tok for tok, k in zip(tokens, keep) if k]


@dataclass
class ForwardCache:
    flat_ids: np.ndarray
    lengths: np.ndarray
    pooled: np.ndarray
    activated: np.ndarray
    norms: np.ndarray
    output: np.ndarray


def forward(params: EncoderParams, token_lists: Sequence[Sequence[str]]):
    """Encode a list of token lists. Returns (unit-norm matrix [n x d], cache for backward)."""
    id_lists = [params.lookup(tokens) for tokens in token_lists]
    for ids in id_lists:
        if ids.size == 0:
            raise EncoderError("cannot encode an empty token list")
    lengths = np.array([ids.size for ids in id_lists], dtype=np.int64)
    if len(id_lists) == 0:
        empty = np.zeros((0, params.d))
        return empty, ForwardCache(np.zeros(0, dtype=np.int64), lengths, empty, empty, np.zeros((0, 1)), empty)

    flat_ids = np.concatenate(id_lists)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    pooled = np.add.reduceat(params.embed[flat_ids], offsets, axis=0) / lengths[:, None]
    activated = np.tanh(pooled @ params.proj.T + params.proj_bias)
    norms = np.maximum(np.linalg.norm(activated, axis=1, keepdims=True), NORM_EPS)
    output = activated / norms
    return output, ForwardCache(flat_ids, lengths, pooled, activated, norms, output)


def backward(params: EncoderParams, cache: ForwardCache, d_output: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients of a scalar loss w.r.t. every parameter, given dLoss/dOutput."""
    u = cache.output
    d_act = (d_output - u * np.sum(d_output * u, axis=1, keepdims=True)) / cache.norms
    d_pre = d_act * (1.0 - cache.activated ** 2)
    grads = {
        "proj": d_pre.T @ cache.pooled,
        "proj_bias": d_pre.sum(axis=0),
        "embed": np.zeros_like(params.embed),
    }
    d_pooled = d_pre @ params.proj
    per_token = np.repeat(d_pooled / cache.lengths[:, None], cache.lengths, axis=0)
    np.add.at(grads["embed"], cache.flat_ids, per_token)
    return grads


def add_grads(total: Optional[Dict[str, np.ndarray]], grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    if total is None:
        return {name: g.copy() for name, g in grads.items()}
    for name, g in grads.items():
        total[name] = total[name] + g
    return total


def encode(params: EncoderParams, tokens: Sequence[str], dropout_p: float = 0.0,
           rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Unit-norm embedding of one token list. Token dropout applies only when dropout_p > 0."""
    if len(tokens) == 0:
        raise EncoderError("cannot encode an empty token list")
    if dropout_p > 0:
        if rng is None:
            raise EncoderError("token dropout needs an rng")
        tokens = drop_tokens(tokens, dropout_p, rng)
    output, _ = forward(params, [tokens])
    return output[0]


def encode_many(params: EncoderParams, token_lists: Sequence[Sequence[str]], batch_size: int = 512) -> np.ndarray:
    """Row-per-input embeddings at dropout 0; empty inputs encode as UNK."""
    unk = [app_config.UNK_TOKEN]
    rows = []
    for start in range(0, len(token_lists), batch_size):
        chunk = [list(t) if len(t) else unk for t in token_lists[start:start + batch_size]]
        output, _ = forward(params, chunk)
        rows.append(output)
    if not rows:
        return np.zeros((0, params.d))
    return np.vstack(rows)


def encode_texts(params: EncoderParams, texts: Sequence[str]) -> np.ndarray:
    return encode_many(params, [text_features(t) for t in texts])


def similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of two unit-norm vectors, clipped to [-1, 1]."""
    return float(np.clip(np.dot(u, v), -1.0, 1.0))

"""Learnable weights of the siamese encoder and its vocabulary."""

import dataclasses
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np

from coderet import config as app_config
from coderet.errors import EncoderError


def build_vocab(token_lists: Iterable[Sequence[str]], max_size: int = None) -> Dict[str, int]:
    """
    Frequency-capped vocabulary with UNK at index 0. Ties in frequency are broken
    alphabetically so the same corpus always yields the same map.
    """
    max_size = max_size or app_config.VOCAB_SIZE
    counts = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    counts.pop(app_config.UNK_TOKEN, None)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:max(max_size - 1, 0)]
    vocab = {app_config.UNK_TOKEN: 0}
    for token, _ in ranked:
        vocab[token] = len(vocab)
    return vocab


@dataclass(eq=False)
class EncoderParams:
    """
    Embedding table, projection and bias of the encoder. Code and text go through
    the same weights (shared is always True).
    """
    vocab: Dict[str, int]
    embed: np.ndarray
    proj: np.ndarray
    proj_bias: np.ndarray
    d: int
    shared: bool = True

    PARAM_NAMES = ("embed", "proj", "proj_bias")

    def __post_init__(self):
        if not self.shared:
            raise EncoderError("code and text encoders must share parameters")
        if self.embed.shape != (len(self.vocab), self.d):
            raise EncoderError(f"embed shape {self.embed.shape} does not match vocab {len(self.vocab)} x d {self.d}")
        if self.proj.shape != (self.d, self.d) or self.proj_bias.shape != (self.d,):
            raise EncoderError("projection shapes do not match d")

    @classmethod
    def initialize(cls, vocab: Dict[str, int], d: int, rng: np.random.Generator) -> "EncoderParams":
        embed = rng.normal(0.0, 1.0, size=(len(vocab), d))
        proj = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, d))
        return cls(vocab=dict(vocab), embed=embed, proj=proj, proj_bias=np.zeros(d), d=d)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.PARAM_NAMES}

    def replace(self, **arrays) -> "EncoderParams":
        return dataclasses.replace(self, **arrays)

    def lookup(self, tokens: Sequence[str]) -> np.ndarray:
        unk = self.vocab[app_config.UNK_TOKEN]
        return np.array([self.vocab.get(tok, unk) for tok in tokens], dtype=np.int64)

    def tokens_in_order(self) -> List[str]:
        return [tok for tok, _ in sorted(self.vocab.items(), key=lambda item: item[1])]

"""Positive-pair records, mining configuration and the direct code-text pair builders."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from coderet import config as app_config
from coderet.corpus.names import is_trivial_function
from coderet.corpus.records import FunctionRecord
from coderet.errors import ConfigError, MiningError
from coderet.utils import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

MODALITIES = ("code_doc", "code_comment", "code_code")
SOURCES = ("direct", "name_match", "doc_match")

DOC_SUFFIX = "#doc"
COMMENT_SUFFIX = "#comment/"


@dataclass
class TrainingPair:
    """
    A positive pair. For text-code pairs left_id names the text ("<fid>#doc" or
    "<fid>#comment/<i>") and right_id the function; code-code pairs hold two
    function ids with the lexicographically smaller one on the left.
    """
    left_id: str
    right_id: str
    modality: str
    source: str
    match_score: Optional[float] = None
    denoise_score: Optional[float] = None
    left_language: Optional[str] = None
    right_language: Optional[str] = None

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise MiningError(f"unknown modality '{self.modality}'")
        if self.source not in SOURCES:
            raise MiningError(f"unknown source '{self.source}'")
        if self.modality == "code_code" and self.left_id == self.right_id:
            raise MiningError(f"code-code pair pairs {self.left_id} with itself")

    @property
    def cross_language(self) -> bool:
        return (self.left_language is not None and self.right_language is not None
                and self.left_language != self.right_language)

    @property
    def key(self):
        return self.left_id, self.right_id

    def to_dict(self) -> Dict[str, Any]:
        return {
            "left_id": self.left_id,
            "right_id": self.right_id,
            "modality": self.modality,
            "source": self.source,
            "match_score": self.match_score,
            "denoise_score": self.denoise_score,
            "left_language": self.left_language,
            "right_language": self.right_language,
            "cross_language": self.cross_language,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainingPair":
        return cls(
            left_id=data["left_id"],
            right_id=data["right_id"],
            modality=data["modality"],
            source=data["source"],
            match_score=data.get("match_score"),
            denoise_score=data.get("denoise_score"),
            left_language=data.get("left_language"),
            right_language=data.get("right_language"),
        )


@dataclass
class MiningConfig:
    """Thresholds and matcher/CrossModel training settings for code-code mining."""
    tau1: float = app_config.TAU1
    tau2: float = app_config.TAU2
    top_k: int = app_config.MINING_TOP_K
    matcher_temperature: float = app_config.MATCHER_TEMPERATURE
    matcher_epochs: int = app_config.MATCHER_EPOCHS
    negative_ratio: int = app_config.NEGATIVE_RATIO
    matcher_batch_size: int = app_config.MATCHER_BATCH_SIZE
    matcher_lr: float = app_config.MATCHER_LR
    matcher_dim: int = app_config.MATCHER_DIM
    token_dropout: float = app_config.TOKEN_DROPOUT
    cross_epochs: int = app_config.CROSS_EPOCHS
    cross_batch_size: int = app_config.CROSS_BATCH_SIZE
    cross_lr: float = app_config.CROSS_LR
    cross_dim: int = app_config.CROSS_DIM
    weight_decay: float = app_config.WEIGHT_DECAY
    denoise: bool = app_config.DENOISE
    tau2_keep_fraction: Optional[float] = app_config.TAU2_KEEP_FRACTION
    seed: int = app_config.SEED

    def __post_init__(self):
        if not 0 < self.tau1 < 1:
            raise ConfigError(f"tau1 must be in (0, 1), got {self.tau1}")
        if not 0 < self.tau2 < 1:
            raise ConfigError(f"tau2 must be in (0, 1), got {self.tau2}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.matcher_temperature <= 0:
            raise ConfigError("matcher_temperature must be positive")
        if self.negative_ratio < 1:
            raise ConfigError("negative_ratio must be >= 1")
        if self.matcher_batch_size < 2 or self.cross_batch_size < 1:
            raise ConfigError("matcher_batch_size must be >= 2 and cross_batch_size >= 1")
        if not 0 <= self.token_dropout < 1:
            raise ConfigError("token_dropout must be in [0, 1)")
        if self.tau2_keep_fraction is not None and not 0 < self.tau2_keep_fraction <= 1:
            raise ConfigError("tau2_keep_fraction must be in (0, 1]")


def doc_text_id(fid: str) -> str:
    return fid + DOC_SUFFIX


def comment_text_id(fid: str, index: int) -> str:
    return f"{fid}{COMMENT_SUFFIX}{index}"


def resolve_text(text_id: str, by_id: Dict[str, FunctionRecord]) -> Optional[str]:
    """Look up the doc or comment a text id refers to."""
    if text_id.endswith(DOC_SUFFIX):
        record = by_id.get(text_id[:-len(DOC_SUFFIX)])
        return record.doc if record else None
    fid, sep, index = text_id.rpartition(COMMENT_SUFFIX)
    if sep and index.isdigit():
        record = by_id.get(fid)
        if record and int(index) < len(record.comments):
            return record.comments[int(index)]
    return None


def build_code_doc_pairs(corpus: Sequence[FunctionRecord]) -> List[TrainingPair]:
    """One pair per function that has a non-empty doc."""
    pairs = [
        TrainingPair(
            left_id=doc_text_id(r.id),
            right_id=r.id,
            modality="code_doc",
            source="direct",
            left_language=r.language,
            right_language=r.language,
        )
        for r in corpus if r.doc and r.doc.strip()
    ]
    logger.info(f"Built {len(pairs)} code-doc pairs")
    return pairs


def build_code_comment_pairs(corpus: Sequence[FunctionRecord]) -> List[TrainingPair]:
    """One pair per cleaned comment, skipping functions with trivial names."""
    pairs = []
    skipped = 0
    for r in corpus:
        if is_trivial_function(r.name):
            skipped += 1
            continue
        for i, _ in enumerate(r.comments):
            pairs.append(TrainingPair(
                left_id=comment_text_id(r.id, i),
                right_id=r.id,
                modality="code_comment",
                source="direct",
                left_language=r.language,
                right_language=r.language,
            ))
    logger.info(f"Built {len(pairs)} code-comment pairs ({skipped} trivial functions skipped)")
    return pairs


def write_pairs(pairs: Sequence[TrainingPair], path: str) -> int:
    return write_jsonl((p.to_dict() for p in pairs), path)


def read_pairs(path: str) -> List[TrainingPair]:
    return [TrainingPair.from_dict(d) for d in read_jsonl(path)]

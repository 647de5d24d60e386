"""Exact dense index with deterministic tie-breaking, and TSV export of its rows."""

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from coderet.corpus.records import FunctionRecord
from coderet.encoder.model import code_features, encode_many, text_features
from coderet.encoder.params import EncoderParams

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-6


@dataclass(eq=False)
class DenseIndex:
    """
    Unit-norm embedding rows with their ids and language tags. Search is an exact
    scan; equal scores are ordered by ascending id.
    """
    ids: List[str]
    vectors: np.ndarray
    languages: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.ids):
            raise ValueError(f"{len(self.ids)} ids but vectors of shape {self.vectors.shape}")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("index ids must be unique")
        if not self.languages:
            self.languages = [""] * len(self.ids)
        if len(self.ids):
            norms = np.linalg.norm(self.vectors, axis=1)
            if np.max(np.abs(norms - 1.0)) > UNIT_TOLERANCE:
                raise ValueError("index rows must be unit-norm")
        self._id_rank = np.argsort(np.argsort(np.array(self.ids, dtype=object), kind="stable"), kind="stable")
        self._positions = {fid: i for i, fid in enumerate(self.ids)}

    def __len__(self):
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def position(self, fid: str) -> Optional[int]:
        return self._positions.get(fid)

    def vector(self, fid: str) -> np.ndarray:
        return self.vectors[self._positions[fid]]

    def search(self, query_vector: np.ndarray, k: int) -> List[Tuple[str, float]]:
        """Top-k (id, cosine) pairs, best first; k larger than the index returns everything."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if len(self) == 0:
            return []
        scores = self.vectors @ np.asarray(query_vector, dtype=np.float64)
        order = np.lexsort((self._id_rank, -scores))[:k]
        return [(self.ids[i], float(scores[i])) for i in order]

    def rank_all(self, query_vector: np.ndarray) -> List[str]:
        return [fid for fid, _ in self.search(query_vector, max(len(self), 1))]


Item = Union[FunctionRecord, str, Tuple[str, str]]


def build_index(
    params: EncoderParams,
    items: Sequence[Item],
    languages: Optional[Iterable[str]] = None,
) -> DenseIndex:
    """
    Encode items at dropout 0 in input order. Items are FunctionRecords (code side),
    (id, text) tuples or bare strings (ids "text/<i>"). `languages` restricts the
    pool to records of those languages.
    """
    wanted = set(languages) if languages else None
    ids, token_lists, langs = [], [], []
    for i, item in enumerate(items):
        if isinstance(item, FunctionRecord):
            if wanted is not None and item.language not in wanted:
                continue
            ids.append(item.id)
            token_lists.append(code_features(item))
            langs.append(item.language)
        else:
            item_id, text = item if isinstance(item, tuple) else (f"text/{i}", item)
            ids.append(item_id)
            token_lists.append(text_features(text))
            langs.append("text")
    vectors = encode_many(params, token_lists) if token_lists else np.zeros((0, params.d))
    return DenseIndex(ids=ids, vectors=vectors, languages=langs)


def export_embeddings(index: DenseIndex, path: str) -> str:
    """Write index rows as TSV: id, language, dim_0 .. dim_{d-1}, in index order."""
    columns = ["id", "language"] + [f"dim_{j}" for j in range(index.dim)]
    frame = pd.DataFrame(index.vectors, columns=columns[2:])
    frame.insert(0, "language", index.languages)
    frame.insert(0, "id", index.ids)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    frame[columns].to_csv(path, sep="\t", index=False)
    logger.info(f"Exported {len(index)} embeddings → {path}")
    return path


def load_embeddings(path: str) -> DenseIndex:
    frame = pd.read_csv(path, sep="\t", dtype={"id": str, "language": str}, keep_default_na=False)
    dims = [c for c in frame.columns if c.startswith("dim_")]
    return DenseIndex(
        ids=frame["id"].tolist(),
        vectors=frame[dims].to_numpy(dtype=np.float64).reshape(len(frame), len(dims)),
        languages=frame["language"].tolist(),
    )

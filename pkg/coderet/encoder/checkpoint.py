import json
import logging
import os
from typing import Any, Dict, Optional, Tuple

import numpy as np

from coderet.encoder.params import EncoderParams
from coderet.errors import EncoderError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "coderet-encoder"
CHECKPOINT_VERSION = 1


def save_checkpoint(params: EncoderParams, path: str, config: Optional[Dict[str, Any]] = None) -> str:
    """
    Write the encoder as a JSON container. Floats are written with repr precision,
    so a reload encodes bit-identically and identical params give identical bytes.
    """
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": config or {},
        "dim": params.d,
        "vocab": params.tokens_in_order(),
        "arrays": {name: value.tolist() for name, value in params.arrays().items()},
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, ensure_ascii=False)
    logger.debug(f"Saved checkpoint ({len(params.vocab)} tokens, d={params.d}) → {path}")
    return path


def load_checkpoint_with_config(path: str) -> Tuple[EncoderParams, Dict[str, Any]]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise EncoderError(f"cannot read checkpoint {path}: {e}")

    if payload.get("format") != CHECKPOINT_FORMAT:
        raise EncoderError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise EncoderError(f"unsupported checkpoint version {payload.get('version')}")

    vocab = {tok: i for i, tok in enumerate(payload["vocab"])}
    arrays = {name: np.array(value, dtype=np.float64) for name, value in payload["arrays"].items()}
    params = EncoderParams(vocab=vocab, d=int(payload["dim"]), **arrays)
    return params, payload.get("config", {})


def load_checkpoint(path: str) -> EncoderParams:
    params, _ = load_checkpoint_with_config(path)
    return params

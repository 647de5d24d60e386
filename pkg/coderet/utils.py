"""Shared I/O and reproducibility helpers."""

import hashlib
import json
import os
from typing import Any, Dict, Iterable, List

import numpy as np


def write_jsonl(records: Iterable[Dict[str, Any]], path: str) -> int:
    """Write one JSON object per line (UTF-8). Returns the number of lines."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def write_json(obj: Any, path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def child_rng(seed: int, *labels) -> np.random.Generator:
    """
    Derive an independent generator from a seed and a path of labels.
    The same (seed, labels) always yields the same stream.
    """
    entropy = [int(seed)]
    for label in labels:
        if isinstance(label, str):
            entropy.append(int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:4], "little"))
        else:
            entropy.append(int(label))
    return np.random.default_rng(np.random.SeedSequence(entropy))

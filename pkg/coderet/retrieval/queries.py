"""Labeled queries and functionality groups used for fine-tuning and evaluation."""

import json
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from coderet.corpus.records import FunctionRecord
from coderet.errors import CodeRetError
from coderet.pairmine.pairs import doc_text_id
from coderet.utils import read_jsonl


@dataclass
class LabeledPair:
    """A natural-language query and the ids of the functions that answer it."""
    query_id: str
    query: str
    gold_ids: List[str]

    def __post_init__(self):
        if not self.gold_ids:
            raise CodeRetError(f"query {self.query_id} has no gold ids")


def load_queries(path: str) -> List[LabeledPair]:
    """Read queries JSONL with fields {id, text, gold_ids}."""
    return [LabeledPair(query_id=str(d["id"]), query=d["text"], gold_ids=list(d["gold_ids"]))
            for d in read_jsonl(path)]


def labeled_pairs_from_docs(
    corpus: Sequence[FunctionRecord],
    equivalents: Sequence[Tuple[str, str]] = (),
) -> List[LabeledPair]:
    """
    Use every doc as a query for its own function. Functions paired in `equivalents`
    (e.g. mined code-code pairs) are added as further gold ids so they are never
    treated as negatives of each other.
    """
    partners: Dict[str, List[str]] = {}
    for a, b in equivalents:
        partners.setdefault(a, []).append(b)
        partners.setdefault(b, []).append(a)
    return [LabeledPair(query_id=doc_text_id(r.id), query=r.doc,
                        gold_ids=[r.id] + sorted(set(partners.get(r.id, [])) - {r.id}))
            for r in corpus if r.doc]


def load_groups(path: str) -> Tuple[Dict[str, List[str]], List[Tuple[str, str]]]:
    """
    Read the functionality-group file: {"groups": {name: [ids]}, "mismatches": [[id, id], ...]}.
    Groups hold functions with the same behaviour; mismatches are same-name pairs that differ.
    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    groups = {name: list(ids) for name, ids in data.get("groups", {}).items()}
    mismatches = [tuple(sorted(pair)) for pair in data.get("mismatches", [])]
    return groups, mismatches


def planted_pairs(groups: Dict[str, List[str]]) -> List[Tuple[str, str]]:
    """Every unordered id pair inside a group, lower id first."""
    pairs = set()
    for ids in groups.values():
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                pairs.add((a, b) if a < b else (b, a))
    return sorted(pairs)

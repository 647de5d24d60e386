"""
Batch streams over positive pairs.

Each anchor key contributes one of its positives per pass (chosen uniformly);
a pass is reshuffled with a seed derived from the pass number. With hybrid
languages, batches are filled round-robin from per-language queues so every
batch mixes languages whenever the data has more than one.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Sequence

from coderet.encoder.losses import Batch
from coderet.utils import child_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Example:
    key: str
    anchor_id: str
    positive_id: str
    anchor: tuple
    positive: tuple
    language: str


def swapped(example: Example) -> Example:
    return Example(example.key, example.positive_id, example.anchor_id,
                   example.positive, example.anchor, example.language)


class PairSampler:
    """Endless, seed-determined stream of batches for one modality."""

    def __init__(
        self,
        groups: Dict[str, Sequence[Example]],
        modality: str,
        batch_size: int,
        seed: int,
        hybrid: bool = True,
        swap_sides: bool = False,
    ):
        if len(groups) < 2:
            raise ValueError(f"{modality}: need at least 2 anchor groups, got {len(groups)}")
        self.groups = {key: sorted(options, key=lambda ex: (ex.positive_id, ex.anchor_id))
                       for key, options in groups.items()}
        self.keys = sorted(self.groups)
        self.modality = modality
        self.batch_size = min(batch_size, len(self.keys))
        self.seed = seed
        self.swap_sides = swap_sides
        self.group_language = {key: self.groups[key][0].language for key in self.keys}
        self.languages = sorted(set(self.group_language.values())) if hybrid else ["*"]
        self.queues = {lang: deque() for lang in self.languages}
        self.passes = {lang: 0 for lang in self.languages}

    def _refill(self, lang: str):
        keys = [k for k in self.keys if lang == "*" or self.group_language[k] == lang]
        rng = child_rng(self.seed, "sampler", self.modality, lang, self.passes[lang])
        self.passes[lang] += 1
        for idx in rng.permutation(len(keys)):
            options = self.groups[keys[idx]]
            example = options[int(rng.integers(len(options)))]
            if self.swap_sides and rng.random() < 0.5:
                example = swapped(example)
            self.queues[lang].append(example)

    def _fill(self, chosen: List[Example], used: set, batch_number: int, strict: bool, target: int):
        """Pull examples round-robin over languages; strict also rejects any reused function id."""
        budget = 4 * self.batch_size + 4 * len(self.languages)
        start = batch_number % len(self.languages)
        for attempt in range(budget):
            if len(chosen) >= target:
                return
            lang = self.languages[(start + attempt) % len(self.languages)]
            queue = self.queues[lang]
            if not queue:
                self._refill(lang)
            example = queue.popleft()
            ids = (example.key, example.anchor_id, example.positive_id) if strict else (example.key,)
            if any(i in used for i in ids):
                queue.append(example)
                continue
            used.update((example.key, example.anchor_id, example.positive_id))
            chosen.append(example)

    def next_examples(self, batch_number: int) -> List[Example]:
        chosen: List[Example] = []
        used = set()
        self._fill(chosen, used, batch_number, strict=True, target=self.batch_size)
        if len(chosen) < 2:
            # Every candidate shares a function with the batch; fall back to distinct anchors only.
            used = {ex.key for ex in chosen}
            self._fill(chosen, used, batch_number, strict=False, target=2)
        return chosen

    def next_batch(self, batch_number: int) -> Batch:
        examples = self.next_examples(batch_number)
        return to_batch(examples, self.modality)


def to_batch(examples: Sequence[Example], modality: str, negatives: Sequence[Sequence[str]] = ()) -> Batch:
    return Batch(
        anchors=[list(ex.anchor) for ex in examples],
        positives=[list(ex.positive) for ex in examples],
        modality=modality,
        languages=[ex.language for ex in examples],
        negatives=[list(n) for n in negatives],
    )

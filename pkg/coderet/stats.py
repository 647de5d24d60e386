"""Pair-corpus statistics: counts per modality and the code-code language-pair matrix."""

import logging
import os
from typing import Any, Dict, Tuple

import pandas as pd

from coderet.pairmine.pairs import MODALITIES
from coderet.utils import read_jsonl, write_json

logger = logging.getLogger(__name__)

PAIR_FILES = {modality: f"{modality}.jsonl" for modality in MODALITIES}


def language_pair_matrix(rows) -> pd.DataFrame:
    """
    Upper-triangular count matrix over sorted languages; an unordered language
    pair is counted once, in the row of the alphabetically smaller language.
    """
    cells: Dict[Tuple[str, str], int] = {}
    languages = set()
    for row in rows:
        a, b = sorted((row.get("left_language") or "unknown", row.get("right_language") or "unknown"))
        languages.update((a, b))
        cells[(a, b)] = cells.get((a, b), 0) + 1
    ordered = sorted(languages)
    matrix = pd.DataFrame(0, index=ordered, columns=ordered, dtype=int)
    for (a, b), count in cells.items():
        matrix.loc[a, b] = count
    return matrix


def report_stats(pairs_dir: str, out_path: str = None) -> Tuple[Dict[str, Any], str]:
    """
    Read the pair files in pairs_dir and return (stats dict, printable report).
    Missing or empty files count as zero pairs.
    """
    counts = {}
    code_code_rows = []
    cross_language = 0
    for modality, filename in PAIR_FILES.items():
        path = os.path.join(pairs_dir, filename)
        rows = read_jsonl(path) if os.path.exists(path) else []
        counts[modality] = len(rows)
        if modality == "code_code":
            code_code_rows = rows
            cross_language = sum(1 for r in rows if r.get("cross_language"))

    matrix = language_pair_matrix(code_code_rows)
    stats = {
        "counts": counts,
        "total": sum(counts.values()),
        "code_code_cross_language": cross_language,
        "language_pairs": {
            f"{a}-{b}": int(matrix.loc[a, b])
            for a in matrix.index for b in matrix.columns if int(matrix.loc[a, b]) > 0
        },
    }

    lines = ["Pair counts:"]
    lines += [f"  {modality:<14}{count:>8}" for modality, count in counts.items()]
    lines.append(f"  {'total':<14}{stats['total']:>8}")
    lines.append("")
    lines.append(f"Code-code pairs by language ({cross_language} cross-language):")
    lines.append(matrix.to_string() if not matrix.empty else "  (none)")
    report = "\n".join(lines)

    if out_path:
        write_json(stats, out_path)
        logger.info(f"Wrote pair statistics to {out_path}")
    return stats, report

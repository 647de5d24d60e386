"""In-line comment merging and filtering."""

import re
from typing import List

from coderet import config as app_config
from coderet.corpus.records import RawComment

# Leading/trailing comment markers of the supported languages.
_LEADING_MARKERS = re.compile(r"^\s*(?:/\*\*|/\*|//+|#+|\*+(?!/)|=begin|\"\"\"|''')\s?")
_TRAILING_MARKERS = re.compile(r"\s*(?:\*/|=end|\"\"\"|''')\s*$")
_CODE_TOKEN = re.compile(r"[();={}\[\]]|^\w+\(|->|::|==|\+\+|--|&&|\|\|")


def strip_comment_markers(text: str) -> str:
    """Remove comment markers from every line and collapse whitespace."""
    lines = []
    for line in text.splitlines() or [text]:
        previous = None
        while line != previous:
            previous = line
            line = _LEADING_MARKERS.sub("", _TRAILING_MARKERS.sub("", line))
        lines.append(line.strip())
    return " ".join(" ".join(lines).split())


def is_commented_code(text: str, threshold: float = None) -> bool:
    """A comment is code when at least `threshold` of its tokens look like code symbols."""
    threshold = app_config.CODE_COMMENT_THRESHOLD if threshold is None else threshold
    tokens = text.split()
    if not tokens:
        return False
    code_like = sum(1 for tok in tokens if _CODE_TOKEN.search(tok))
    return code_like / len(tokens) >= threshold


def is_linter_directive(text: str) -> bool:
    return re.match(app_config.LINTER_PATTERN, text, re.IGNORECASE) is not None


def merge_comments(raw: List[RawComment]) -> List[str]:
    """Join comments on consecutive lines into one string, markers removed."""
    merged: List[str] = []
    current: List[str] = []
    last_line = None
    for comment in raw:
        text = strip_comment_markers(comment.text)
        if last_line is not None and comment.line - last_line > 1:
            merged.append(" ".join(current))
            current = []
        if text:
            current.append(text)
        last_line = comment.end_line
    if last_line is not None:
        merged.append(" ".join(current))
    return [m for m in merged if m]


def keep_comment(text: str) -> bool:
    tokens = text.split()
    if len(tokens) < app_config.MIN_COMMENT_TOKENS:
        return False
    if tokens[0].upper().startswith("TODO"):
        return False
    if is_linter_directive(text):
        return False
    if is_commented_code(text):
        return False
    return True


def clean_comments(raw: List[RawComment]) -> List[str]:
    """
    Merge consecutive-line comments, then drop the uninformative ones:
    fewer than four tokens, TODO notes, linter directives and commented-out code.
    """
    return [text for text in merge_comments(raw) if keep_comment(text)]

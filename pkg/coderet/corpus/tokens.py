"""Word-level tokenization shared by the encoders, the matchers and the CrossModel."""

import re
from typing import Iterable, List

from coderet.corpus.names import normalize_name

_LEX = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*|\d+(?:\.\d+)?|\S")


def subtokens(token: str) -> List[str]:
    """Split an identifier into its normalized-name parts: "parseHTTPHeader" -> ["parse", "http", "header"]."""
    parts = normalize_name(token).split()
    return parts or [token.lower()]


def tokenize_text(text: str) -> List[str]:
    """
    Lex free text into lowercase word tokens. Identifiers are split into their
    name parts so that "openFile" in a doc and open_file in code share tokens.
    Punctuation is dropped.
    """
    tokens = []
    for tok in _LEX.findall(text or ""):
        first = tok[0]
        if first.isalpha() or first in "_$":
            tokens.extend(subtokens(tok))
        elif first.isdigit():
            tokens.append(tok)
    return tokens


def tokenize_code(code_tokens: Iterable[str]) -> List[str]:
    """Encoder tokens of a comment-free code token list; string literal contents are lexed as text."""
    tokens = []
    for tok in code_tokens:
        tokens.extend(tokenize_text(tok))
    return tokens

"""Function-name normalization and the trivial-function filter."""

import re

from coderet import config as app_config

# Boundaries: lower/digit -> Upper, and the last capital of an acronym before a lowercase letter.
_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_NON_ALNUM = re.compile(r"[^A-Za-z0-9]+")


def normalize_name(name: str) -> str:
    """
    Normalize a function name to lowercase space-separated tokens.

    Examples:
        normalize_name("openFile") -> "open file"
        normalize_name("open_file") -> "open file"
        normalize_name("HTTPServerStart") -> "http server start"
    """
    parts = []
    for chunk in _NON_ALNUM.split(name):
        if chunk:
            parts.extend(p for p in _CAMEL_BOUNDARY.split(chunk) if p)
    return " ".join(p.lower() for p in parts)


def _trivial_names():
    return {normalize_name(n) for n in app_config.TRIVIAL_FUNCTION_NAMES}


def is_trivial_function(name: str) -> bool:
    """True when the function carries too little meaning to pair with its comments."""
    return normalize_name(name) in _trivial_names()

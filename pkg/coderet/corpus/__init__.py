"""Function corpus ingestion: lexing, comment cleaning and name normalization."""

from coderet.corpus.comments import clean_comments, strip_comment_markers
from coderet.corpus.names import is_trivial_function, normalize_name
from coderet.corpus.parser import parse_corpus
from coderet.corpus.records import (
    FunctionRecord,
    ParseWarning,
    RawComment,
    read_corpus,
    write_corpus,
)
from coderet.corpus.tokens import subtokens, tokenize_code, tokenize_text

__all__ = [
    'FunctionRecord',
    'RawComment',
    'ParseWarning',
    'parse_corpus',
    'clean_comments',
    'strip_comment_markers',
    'is_trivial_function',
    'normalize_name',
    'read_corpus',
    'write_corpus',
    'subtokens',
    'tokenize_code',
    'tokenize_text',
]

"""Function corpus records and their JSONL form."""

from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

from coderet.utils import read_jsonl, write_jsonl


@dataclass
class RawComment:
    """A comment as lexed from source, markers still attached."""
    text: str
    line: int
    kind: str = "line"  # line | block

    def __post_init__(self):
        if self.line < 1:
            raise ValueError(f"comment line must be >= 1, got {self.line}")

    @property
    def end_line(self) -> int:
        return self.line + self.text.count("\n")


@dataclass
class FunctionRecord:
    """One parsed function: name, doc, cleaned comments and comment-free body tokens."""
    id: str
    language: str
    name: str
    name_normalized: str
    doc: Optional[str]
    comments: List[str]
    code_tokens: List[str]
    source_path: str
    line_span: Tuple[int, int]

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["line_span"] = list(self.line_span)
        return record

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FunctionRecord":
        return cls(
            id=data["id"],
            language=data["language"],
            name=data["name"],
            name_normalized=data["name_normalized"],
            doc=data.get("doc") or None,
            comments=list(data.get("comments", [])),
            code_tokens=list(data["code_tokens"]),
            source_path=data["source_path"],
            line_span=tuple(data["line_span"]),
        )


@dataclass
class ParseWarning:
    """A file that was skipped during ingestion."""
    path: str
    reason: str


@dataclass
class ParsedFunction:
    """Lexer output for one function, before cleaning and normalization."""
    name: str
    doc: Optional[str]
    raw_comments: List[RawComment] = field(default_factory=list)
    code_tokens: List[str] = field(default_factory=list)
    start_line: int = 1
    end_line: int = 1


def write_corpus(records: List[FunctionRecord], path: str) -> int:
    return write_jsonl((r.to_dict() for r in records), path)


def read_corpus(path: str) -> List[FunctionRecord]:
    return [FunctionRecord.from_dict(d) for d in read_jsonl(path)]

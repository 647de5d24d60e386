"""Exception hierarchy for coderet."""

from typing import Optional


class CodeRetError(Exception):
    """Base exception for coderet errors."""
    pass


class ConfigError(CodeRetError):
    """Invalid or unknown configuration."""
    pass


class CorpusError(CodeRetError):
    """Corpus ingestion failed."""
    pass


class UnsupportedLanguageError(CorpusError):
    """A language outside the supported set was requested."""
    def __init__(self, language: str, supported):
        self.language = language
        self.supported = tuple(supported)
        super().__init__(f"unsupported language '{language}' (supported: {', '.join(self.supported)})")


class MiningError(CodeRetError):
    """Pair mining could not proceed."""
    pass


class EncoderError(CodeRetError):
    """Invalid encoder input or checkpoint."""
    pass


class TrainingError(CodeRetError):
    """Training could not proceed."""
    pass


class StageError(CodeRetError):
    """A pipeline stage failed; carries the stage name."""
    def __init__(self, stage: str, cause: Optional[Exception] = None, message: Optional[str] = None):
        self.stage = stage
        self.cause = cause
        detail = message or (str(cause) if cause else "failed")
        super().__init__(f"[{stage}] {detail}")

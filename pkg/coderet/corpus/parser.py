import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Tuple

from tqdm import tqdm

from coderet import config as app_config
from coderet.corpus.comments import clean_comments
from coderet.corpus.lexers import LEXERS
from coderet.corpus.names import normalize_name
from coderet.corpus.records import FunctionRecord, ParsedFunction, ParseWarning
from coderet.errors import CodeRetError, CorpusError, UnsupportedLanguageError

logger = logging.getLogger(__name__)


def discover_files(root: str, languages: Iterable[str]) -> List[Tuple[str, str]]:
    """Return (path, language) for every source file under root, sorted by relative path."""
    wanted = set(languages)
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for filename in filenames:
            language = app_config.LANGUAGE_EXTENSIONS.get(os.path.splitext(filename)[1].lower())
            if language in wanted:
                found.append((os.path.join(dirpath, filename), language))
    found.sort(key=lambda item: os.path.relpath(item[0], root).replace(os.sep, "/"))
    return found


def parse_file(path: str, language: str, root: str) -> List[FunctionRecord]:
    """Parse one file into FunctionRecords with cleaned comments."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            source = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusError(f"unreadable file: {e}")

    rel_path = os.path.relpath(path, root).replace(os.sep, "/")
    parsed: List[ParsedFunction] = LEXERS[language].extract(source)

    records = []
    seen = {}
    for fn in parsed:
        if not fn.code_tokens:
            continue
        normalized = normalize_name(fn.name)
        if not normalized:
            continue
        count = seen.get(fn.name, 0)
        seen[fn.name] = count + 1
        fid = f"{rel_path}::{fn.name}" if count == 0 else f"{rel_path}::{fn.name}#{count}"
        records.append(FunctionRecord(
            id=fid,
            language=language,
            name=fn.name,
            name_normalized=normalized,
            doc=fn.doc or None,
            comments=clean_comments(sorted(fn.raw_comments, key=lambda c: c.line)),
            code_tokens=fn.code_tokens,
            source_path=rel_path,
            line_span=(fn.start_line, fn.end_line),
        ))
    return records


def parse_corpus(
    root: str,
    languages: Iterable[str],
    warnings: Optional[List[ParseWarning]] = None,
    workers: int = None,
) -> List[FunctionRecord]:
    """
    Walk root, lex every file of the requested languages and emit cleaned records
    ordered by relative path, then start line. Unreadable or unparsable files are
    skipped and reported through `warnings`.
    """
    languages = list(languages)
    if not languages:
        raise CorpusError("no languages requested")
    for language in languages:
        if language not in app_config.SUPPORTED_LANGUAGES:
            raise UnsupportedLanguageError(language, app_config.SUPPORTED_LANGUAGES)
    if not os.path.isdir(root):
        raise CorpusError(f"corpus root does not exist: {root}")

    files = discover_files(root, languages)
    logger.info(f"Found {len(files)} source files under {root}")
    workers = workers or app_config.PARSE_WORKERS

    def _parse(item):
        path, language = item
        try:
            return path, parse_file(path, language, root), None
        except CodeRetError as e:
            return path, [], str(e)

    records: List[FunctionRecord] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for path, file_records, error in tqdm(pool.map(_parse, files), total=len(files),
                                              desc="📂 Parsing", disable=not files):
            if error is not None:
                logger.warning(f"Skipping {path}: {error}")
                if warnings is not None:
                    warnings.append(ParseWarning(path=path, reason=error))
                continue
            records.extend(file_records)

    records.sort(key=lambda r: (r.source_path, r.line_span[0], r.id))
    logger.info(f"Parsed {len(records)} functions from {len(files)} files")
    return records

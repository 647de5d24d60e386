import pytest

from coderet.corpus.comments import clean_comments, is_commented_code, strip_comment_markers
from coderet.corpus.names import is_trivial_function, normalize_name
from coderet.corpus.parser import parse_corpus
from coderet.corpus.records import RawComment, read_corpus, write_corpus
from coderet.corpus.tokens import tokenize_text
from coderet.errors import CorpusError, UnsupportedLanguageError

PYTHON_SOURCE = '''
def open_file(path):
    """Open the file at path for reading."""
    # read everything in one call here
    return open(path).read()


def add(a, b):
    return a + b
'''

JAVA_SOURCE = '''
package demo;

public class Util {
    /**
     * Open the file at path for reading.
     * @param path the file
     */
    public String openFile(String path) {
        // read everything in one call here
        return read(path);
    }
}
'''

DUPLICATE_SOURCE = '''
class First:
    def run(self):
        return 1


class Second:
    def run(self):
        return 2
'''


def _raw(*lines):
    """RawComments on the given (text, line) tuples."""
    return [RawComment(text=text, line=line) for text, line in lines]


@pytest.mark.parametrize("name, expected", [
    ("openFile", "open file"),
    ("open_file", "open file"),
    ("HTTPServerStart", "http server start"),
    ("__repr__", "repr"),
    ("parseJSON2Dict", "parse json2 dict"),
])
def test_normalize_name(name, expected):
    assert normalize_name(name) == expected


def test_normalize_name_is_idempotent():
    for name in ["openFile", "HTTPServerStart", "read_all_lines", "toString", "x"]:
        once = normalize_name(name)
        assert normalize_name(once) == once


def test_trivial_functions():
    assert is_trivial_function("__getter__")
    assert is_trivial_function("toString")
    assert is_trivial_function("__repr__")
    assert is_trivial_function("hashCode")
    assert is_trivial_function("get")
    assert not is_trivial_function("get_value")
    assert not is_trivial_function("bubbleSort")


def test_strip_comment_markers():
    assert strip_comment_markers("# keep the order") == "keep the order"
    assert strip_comment_markers("// keep the order") == "keep the order"
    assert strip_comment_markers("/* keep\n * the order */") == "keep the order"


def test_consecutive_comments_are_merged():
    raw = _raw(("# if adjacent elements appear", 3), ("# in descending order, swap them", 4))
    assert clean_comments(raw) == ["if adjacent elements appear in descending order, swap them"]


def test_comments_separated_by_a_gap_stay_apart():
    raw = _raw(("# first comment has four words", 3), ("# second comment has four words", 5))
    assert clean_comments(raw) == ["first comment has four words", "second comment has four words"]


@pytest.mark.parametrize("text", [
    "# TODO fix the ordering later",
    "# swap",
    "# noqa: E501 long line here",
    "// checkstyle off for this block",
    "# result = sum(numbers) / len(numbers)",
])
def test_uninformative_comments_are_dropped(text):
    assert clean_comments(_raw((text, 1))) == []


def test_commented_code_detection():
    assert is_commented_code("result = sum(numbers) / len(numbers)")
    assert not is_commented_code("if adjacent elements appear in descending order")


def test_clean_comments_is_idempotent():
    raw = _raw(
        ("# if adjacent elements appear", 3),
        ("# in descending order, swap them", 4),
        ("# TODO remove", 6),
        ("# discard the half that cannot hold the target", 9),
    )
    cleaned = clean_comments(raw)
    again = clean_comments(_raw(*[(text, 1 + 2 * i) for i, text in enumerate(cleaned)]))
    assert again == cleaned


def test_tokenize_text_splits_identifiers():
    assert tokenize_text("Call openFile() then read_lines!") == ["call", "open", "file", "then", "read", "lines"]


def test_parse_python_functions(tmp_path):
    (tmp_path / "util.py").write_text(PYTHON_SOURCE, encoding="utf-8")
    records = parse_corpus(str(tmp_path), ["python"])

    assert [r.id for r in records] == ["util.py::open_file", "util.py::add"]
    open_file = records[0]
    assert open_file.doc == "Open the file at path for reading."
    assert open_file.comments == ["read everything in one call here"]
    assert open_file.name_normalized == "open file"
    assert "#" not in " ".join(open_file.code_tokens)
    assert records[1].doc is None
    assert records[0].line_span[0] < records[1].line_span[0]


def test_parse_java_javadoc(tmp_path):
    (tmp_path / "Util.java").write_text(JAVA_SOURCE, encoding="utf-8")
    records = parse_corpus(str(tmp_path), ["java"])

    assert len(records) == 1
    record = records[0]
    assert record.id == "Util.java::openFile"
    assert record.doc == "Open the file at path for reading."
    assert record.comments == ["read everything in one call here"]
    assert record.language == "java"


def test_repeated_names_get_suffixes(tmp_path):
    (tmp_path / "jobs.py").write_text(DUPLICATE_SOURCE, encoding="utf-8")
    records = parse_corpus(str(tmp_path), ["python"])
    assert [r.id for r in records] == ["jobs.py::run", "jobs.py::run#1"]


def test_empty_directory_gives_empty_corpus(tmp_path):
    assert parse_corpus(str(tmp_path), ["python", "java"]) == []


def test_unsupported_language(tmp_path):
    with pytest.raises(UnsupportedLanguageError) as excinfo:
        parse_corpus(str(tmp_path), ["cobol"])
    assert excinfo.value.language == "cobol"


def test_no_languages(tmp_path):
    with pytest.raises(CorpusError):
        parse_corpus(str(tmp_path), [])


def test_missing_root(tmp_path):
    with pytest.raises(CorpusError):
        parse_corpus(str(tmp_path / "nowhere"), ["python"])


def test_unreadable_file_is_skipped_with_warning(tmp_path):
    (tmp_path / "good.py").write_text(PYTHON_SOURCE, encoding="utf-8")
    (tmp_path / "bad.py").write_bytes(b"def broken():\n    return '\xff\xfe'\n")
    warnings = []
    records = parse_corpus(str(tmp_path), ["python"], warnings=warnings)

    assert {r.source_path for r in records} == {"good.py"}
    assert len(warnings) == 1
    assert warnings[0].path.endswith("bad.py")


def test_corpus_jsonl_round_trip(tmp_path):
    (tmp_path / "util.py").write_text(PYTHON_SOURCE, encoding="utf-8")
    records = parse_corpus(str(tmp_path), ["python"])
    path = str(tmp_path / "corpus.jsonl")
    write_corpus(records, path)
    assert read_corpus(path) == records


def test_toy_corpus_counts(toy_corpus):
    languages = [r.language for r in toy_corpus]
    assert languages.count("python") == 32
    assert languages.count("java") == 28
    assert len({r.id for r in toy_corpus}) == len(toy_corpus)


def test_toy_corpus_docs_and_comments(toy_by_id):
    bubble = toy_by_id["java/Sorting.java::bubbleSort"]
    assert bubble.doc == "Sort the input array into ascending order."
    assert "if adjacent elements appear in descending order, swap them" in bubble.comments

    python_bubble = toy_by_id["python/sorting.py::bubble_sort"]
    assert python_bubble.doc == "Sort the input list into ascending order."
    assert python_bubble.comments == ["if adjacent elements appear in descending order, swap them"]

    assert toy_by_id["python/text_utils.py::count_words"].comments == []
    assert toy_by_id["python/math_utils.py::mean"].comments == []


def test_toy_corpus_is_ordered(toy_corpus):
    keys = [(r.source_path, r.line_span[0]) for r in toy_corpus]
    assert keys == sorted(keys)

"""
Lightweight per-language lexers that split functions into name, doc,
in-line comments and comment-free code tokens.

They handle string literals, line/block comments and brace/indent/keyword
function boundaries; they do not build syntax trees.
"""

import ast
import io
import re
import tokenize
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from coderet.corpus.comments import strip_comment_markers
from coderet.corpus.records import ParsedFunction, RawComment
from coderet.errors import CorpusError


@dataclass
class Token:
    kind: str  # code | string | comment
    text: str
    line: int
    end_line: int
    comment_kind: str = ""  # line | block


def _clean_block_doc(text: str) -> Optional[str]:
    """Strip comment markers and drop @tag sections of Javadoc/JSDoc/PHPDoc blocks."""
    kept = []
    for line in text.splitlines():
        stripped = strip_comment_markers(line)
        if stripped.startswith("@"):
            break
        kept.append(stripped)
    doc = " ".join(" ".join(kept).split())
    return doc or None


def _first_paragraph(text: str) -> Optional[str]:
    paragraph = re.split(r"\n\s*\n", text.strip(), maxsplit=1)[0]
    doc = " ".join(paragraph.split())
    return doc or None


class SourceLexer:
    """Base class: subclasses turn a source string into ParsedFunctions."""

    language = ""

    def extract(self, source: str) -> List[ParsedFunction]:
        raise NotImplementedError("Subclass must implement extract")


class PythonLexer(SourceLexer):
    """Indentation-based function boundaries on top of the stdlib tokenizer."""

    language = "python"
    _SKIP = {tokenize.NL, tokenize.NEWLINE, tokenize.INDENT, tokenize.DEDENT,
             tokenize.ENDMARKER, tokenize.COMMENT}

    def extract(self, source: str) -> List[ParsedFunction]:
        try:
            tokens = list(tokenize.generate_tokens(io.StringIO(source).readline))
        except (tokenize.TokenError, IndentationError, SyntaxError) as e:
            raise CorpusError(f"python tokenization failed: {e}")

        functions = []
        for i, tok in enumerate(tokens):
            if tok.type == tokenize.NAME and tok.string == "def":
                parsed = self._function_at(tokens, i)
                if parsed is not None:
                    functions.append(parsed)
        return functions

    def _function_at(self, tokens, i) -> Optional[ParsedFunction]:
        start = i - 1 if i > 0 and tokens[i - 1].string == "async" else i
        def_col = tokens[start].start[1]
        if i + 1 >= len(tokens) or tokens[i + 1].type != tokenize.NAME:
            return None
        name = tokens[i + 1].string

        # Header ends at the ':' outside any bracket.
        depth = 0
        colon = None
        for j in range(i + 2, len(tokens)):
            text = tokens[j].string
            if tokens[j].type == tokenize.OP:
                if text in "([{":
                    depth += 1
                elif text in ")]}":
                    depth -= 1
                elif text == ":" and depth == 0:
                    colon = j
                    break
        if colon is None:
            return None

        k = colon + 1
        while k < len(tokens) and tokens[k].type in (tokenize.COMMENT,):
            k += 1
        if k < len(tokens) and tokens[k].type == tokenize.NEWLINE:
            end = self._block_end(tokens, k + 1, def_col)
        else:
            end = k
            while end < len(tokens) and tokens[end].type != tokenize.NEWLINE:
                end += 1

        # Docstring: first statement of the body is a bare string.
        doc = None
        doc_index = None
        m = colon + 1
        while m < end and tokens[m].type in self._SKIP:
            m += 1
        if m < end and tokens[m].type == tokenize.STRING:
            n = m + 1
            if n >= len(tokens) or tokens[n].type in (tokenize.NEWLINE, tokenize.ENDMARKER):
                doc_index = m
                try:
                    value = ast.literal_eval(tokens[m].string)
                except (ValueError, SyntaxError):
                    value = tokens[m].string.strip("\"'")
                if isinstance(value, bytes):
                    value = value.decode("utf-8", errors="ignore")
                doc = _first_paragraph(value)

        code_tokens = []
        raw_comments = []
        last_line = tokens[start].start[0]
        for j in range(start, end):
            tok = tokens[j]
            if tok.type == tokenize.COMMENT:
                raw_comments.append(RawComment(text=tok.string, line=tok.start[0], kind="line"))
                last_line = max(last_line, tok.end[0])
                continue
            if tok.type in self._SKIP or j == doc_index:
                continue
            code_tokens.append(tok.string)
            last_line = max(last_line, tok.end[0])

        if not code_tokens:
            return None
        return ParsedFunction(
            name=name,
            doc=doc,
            raw_comments=raw_comments,
            code_tokens=code_tokens,
            start_line=tokens[start].start[0],
            end_line=last_line,
        )

    @staticmethod
    def _block_end(tokens, j, def_col) -> int:
        """Index of the first logical-line token dedented to the def column or beyond."""
        depth = 0
        at_line_start = True
        while j < len(tokens):
            tok = tokens[j]
            if tok.type == tokenize.ENDMARKER:
                return j
            if tok.type in (tokenize.NEWLINE, tokenize.NL, tokenize.INDENT, tokenize.DEDENT):
                at_line_start = depth == 0
            elif tok.type != tokenize.COMMENT:
                if at_line_start and depth == 0 and tok.start[1] <= def_col:
                    return j
                if tok.type == tokenize.OP and tok.string in "([{":
                    depth += 1
                elif tok.type == tokenize.OP and tok.string in ")]}":
                    depth -= 1
                at_line_start = False
            j += 1
        return j


class BraceLexer(SourceLexer):
    """Character-level lexer shared by the curly-brace languages."""

    hash_comments = False
    keywords: frozenset = frozenset()

    _OPERATORS = ["===", "!==", "...", "->", "=>", "::", "==", "!=", "<=", ">=", "&&",
                  "||", "++", "--", "+=", "-=", "*=", "/=", ":=", "<<", ">>"]

    def __init__(self):
        comment = r"//[^\n]*"
        if self.hash_comments:
            comment += r"|#(?!\[)[^\n]*"
        ops = "|".join(re.escape(op) for op in self._OPERATORS)
        self._pattern = re.compile(
            rf"(?P<block>/\*[\s\S]*?(?:\*/|\Z))"
            rf"|(?P<line>{comment})"
            r"|(?P<string>\"(?:\\.|[^\"\\\n])*\"?|'(?:\\.|[^'\\\n])*'?|`[^`]*`?)"
            r"|(?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)"
            r"|(?P<number>\d[\w.]*)"
            rf"|(?P<op>{ops}|\S)"
            r"|(?P<space>\s+)"
        )

    def lex(self, source: str) -> List[Token]:
        tokens = []
        line = 1
        pos = 0
        while pos < len(source):
            match = self._pattern.match(source, pos)
            if match is None:  # pragma: no cover - the pattern accepts any character
                break
            text = match.group(0)
            kind = match.lastgroup
            newlines = text.count("\n")
            if kind == "block":
                tokens.append(Token("comment", text, line, line + newlines, "block"))
            elif kind == "line":
                tokens.append(Token("comment", text, line, line, "line"))
            elif kind == "string":
                tokens.append(Token("string", text, line, line + newlines))
            elif kind != "space":
                tokens.append(Token("code", text, line, line + newlines))
            line += newlines
            pos = match.end()
        return tokens

    def extract(self, source: str) -> List[ParsedFunction]:
        stream = self.lex(source)
        code_positions = [i for i, tok in enumerate(stream) if tok.kind != "comment"]
        code = [stream[i] for i in code_positions]
        functions = []
        for name, decl_start, body_open in self.find_functions(code):
            body_close = self._match(code, body_open, "{", "}")
            if body_close is None:
                continue
            functions.append(self._build(stream, code, code_positions, name, decl_start, body_close))
        return functions

    def find_functions(self, code: List[Token]) -> List[Tuple[str, int, int]]:
        """Yield (name, declaration start index, body '{' index) over code tokens."""
        raise NotImplementedError("Subclass must implement find_functions")

    @staticmethod
    def _match(code: List[Token], i: int, opener: str, closer: str) -> Optional[int]:
        depth = 0
        for j in range(i, len(code)):
            if code[j].kind != "code":
                continue
            if code[j].text == opener:
                depth += 1
            elif code[j].text == closer:
                depth -= 1
                if depth == 0:
                    return j
        return None

    @staticmethod
    def _is_ident(tok: Token) -> bool:
        return tok.kind == "code" and re.match(r"[A-Za-z_$]", tok.text) is not None

    def _statement_start(self, code: List[Token], i: int) -> int:
        j = i
        while j > 0 and not (code[j - 1].kind == "code" and code[j - 1].text in (";", "{", "}")):
            j -= 1
        return j

    def _build(self, stream, code, code_positions, name, decl_start, body_close) -> ParsedFunction:
        first = code_positions[decl_start]
        last = code_positions[body_close]
        previous = code_positions[decl_start - 1] if decl_start > 0 else -1
        doc = self._doc_between(stream[previous + 1:first], stream[first].line)
        raw_comments = [
            RawComment(text=tok.text, line=tok.line, kind=tok.comment_kind)
            for tok in stream[first:last + 1] if tok.kind == "comment"
        ]
        return ParsedFunction(
            name=name,
            doc=doc,
            raw_comments=raw_comments,
            code_tokens=[tok.text for tok in code[decl_start:body_close + 1]],
            start_line=stream[first].line,
            end_line=stream[last].end_line,
        )

    @staticmethod
    def _doc_between(comments: List[Token], decl_line: int) -> Optional[str]:
        """Doc is the comment block ending on the line right above the declaration."""
        comments = [c for c in comments if c.kind == "comment"]
        if not comments or comments[-1].end_line < decl_line - 1:
            return None
        last = comments[-1]
        if last.comment_kind == "block":
            return _clean_block_doc(last.text)
        group = [last]
        for tok in reversed(comments[:-1]):
            if tok.comment_kind != "line" or tok.end_line < group[0].line - 1:
                break
            group.insert(0, tok)
        return _clean_block_doc("\n".join(tok.text for tok in group))


class JavaLexer(BraceLexer):
    language = "java"
    keywords = frozenset({
        "if", "for", "while", "switch", "catch", "synchronized", "return", "new",
        "throw", "else", "do", "try", "case", "assert", "super", "this",
    })

    def find_functions(self, code):
        found = []
        for i in range(1, len(code) - 1):
            tok, nxt, prev = code[i], code[i + 1], code[i - 1]
            if not self._is_ident(tok) or tok.text in self.keywords or nxt.text != "(":
                continue
            if not (self._is_ident(prev) or prev.text in (">", "]")) or prev.text in self.keywords:
                continue
            close = self._match(code, i + 1, "(", ")")
            if close is None:
                continue
            j = close + 1
            if j < len(code) and code[j].text == "throws":
                j += 1
                while j < len(code) and (self._is_ident(code[j]) or code[j].text in (",", ".", "<", ">")):
                    j += 1
            if j < len(code) and code[j].text == "{":
                found.append((tok.text, self._statement_start(code, i), j))
        return found


class GoLexer(BraceLexer):
    language = "go"

    def find_functions(self, code):
        found = []
        for i, tok in enumerate(code):
            if tok.kind != "code" or tok.text != "func" or i + 1 >= len(code):
                continue
            j = i + 1
            if code[j].text == "(":
                receiver_close = self._match(code, j, "(", ")")
                if receiver_close is None:
                    continue
                j = receiver_close + 1
            if j + 1 >= len(code) or not self._is_ident(code[j]):
                continue
            name = code[j].text
            j += 1
            if code[j].text == "[":
                type_close = self._match(code, j, "[", "]")
                if type_close is None:
                    continue
                j = type_close + 1
            if j >= len(code) or code[j].text != "(":
                continue
            params_close = self._match(code, j, "(", ")")
            if params_close is None:
                continue
            depth = 0
            body = None
            for k in range(params_close + 1, len(code)):
                text = code[k].text
                if text in ("(", "["):
                    depth += 1
                elif text in (")", "]"):
                    depth -= 1
                elif text == "{" and depth == 0:
                    if k > 0 and code[k - 1].text in ("struct", "interface"):
                        close = self._match(code, k, "{", "}")
                        if close is None:
                            break
                        continue
                    body = k
                    break
                elif text in ("}", ";") or code[k].text == "func":
                    break
            if body is not None:
                found.append((name, i, body))
        return found


class JavaScriptLexer(BraceLexer):
    language = "javascript"
    keywords = frozenset({
        "if", "for", "while", "switch", "catch", "return", "new", "function", "typeof",
        "else", "do", "try", "with", "await", "yield", "throw", "delete", "void", "super",
    })
    _METHOD_PREFIX = frozenset({"{", "}", ";", "static", "async", "get", "set", "*"})
    _DECL_PREFIX = frozenset({"export", "default", "async", "const", "let", "var"})

    def _walk_prefix(self, code, i):
        while i > 0 and code[i - 1].text in self._DECL_PREFIX:
            i -= 1
        return i

    def find_functions(self, code):
        found = []
        n = len(code)
        for i, tok in enumerate(code):
            if tok.kind != "code":
                continue
            # function name(...) { ... }
            if tok.text == "function":
                j = i + 1
                if j < n and code[j].text == "*":
                    j += 1
                if j + 1 < n and self._is_ident(code[j]) and code[j + 1].text == "(":
                    body = self._body_after_params(code, j + 1)
                    if body is not None:
                        found.append((code[j].text, self._walk_prefix(code, i), body))
                continue
            if not self._is_ident(tok) or tok.text in self.keywords or i + 1 >= n:
                continue
            nxt = code[i + 1]
            # name = function (...) {  /  name: function (...) {  /  name = (...) => {
            if nxt.text in ("=", ":") and i + 2 < n:
                j = i + 2
                if code[j].text == "async":
                    j += 1
                if j < n and code[j].text == "function":
                    j += 1
                    if j < n and code[j].text == "*":
                        j += 1
                    if j < n and self._is_ident(code[j]):
                        j += 1
                    if j < n and code[j].text == "(":
                        body = self._body_after_params(code, j)
                        if body is not None:
                            found.append((tok.text, self._walk_prefix(code, i), body))
                elif j < n and code[j].text == "(":
                    close = self._match(code, j, "(", ")")
                    if close is not None and close + 2 < n and code[close + 1].text == "=>" \
                            and code[close + 2].text == "{":
                        found.append((tok.text, self._walk_prefix(code, i), close + 2))
                elif j + 2 < n and self._is_ident(code[j]) and code[j + 1].text == "=>" \
                        and code[j + 2].text == "{":
                    found.append((tok.text, self._walk_prefix(code, i), j + 2))
                continue
            # class method: name(...) {
            if nxt.text == "(" and (i == 0 or code[i - 1].text in self._METHOD_PREFIX):
                body = self._body_after_params(code, i + 1)
                if body is not None:
                    start = i
                    while start > 0 and code[start - 1].text in ("static", "async", "get", "set", "*"):
                        start -= 1
                    found.append((tok.text, start, body))
        return found

    def _body_after_params(self, code, open_paren):
        close = self._match(code, open_paren, "(", ")")
        if close is not None and close + 1 < len(code) and code[close + 1].text == "{":
            return close + 1
        return None


class PhpLexer(BraceLexer):
    language = "php"
    hash_comments = True
    _MODIFIERS = frozenset({"public", "private", "protected", "static", "abstract", "final"})

    def find_functions(self, code):
        found = []
        n = len(code)
        for i, tok in enumerate(code):
            if tok.kind != "code" or tok.text.lower() != "function":
                continue
            j = i + 1
            if j < n and code[j].text == "&":
                j += 1
            if j + 1 >= n or not self._is_ident(code[j]) or code[j + 1].text != "(":
                continue
            close = self._match(code, j + 1, "(", ")")
            if close is None:
                continue
            k = close + 1
            if k < n and code[k].text == ":":
                k += 1
                while k < n and code[k].text not in ("{", ";"):
                    k += 1
            if k < n and code[k].text == "{":
                start = i
                while start > 0 and code[start - 1].text.lower() in self._MODIFIERS:
                    start -= 1
                found.append((code[j].text, start, k))
        return found


class RubyLexer(SourceLexer):
    """Keyword-delimited (def ... end) functions."""

    language = "ruby"
    _ALWAYS_OPEN = frozenset({"def", "class", "module", "do", "begin", "case"})
    _LINE_OPEN = frozenset({"if", "unless", "while", "until", "for"})
    _pattern = re.compile(
        r"(?P<block>^=begin\b[\s\S]*?^=end\b[^\n]*)"
        r"|(?P<line>#[^\n]*)"
        r"|(?P<string>\"(?:\\.|[^\"\\])*\"?|'(?:\\.|[^'\\])*'?)"
        r"|(?P<ident>[A-Za-z_@$][A-Za-z0-9_]*[?!]?)"
        r"|(?P<number>\d[\w.]*)"
        r"|(?P<op>==|!=|<=|>=|&&|\|\||<<|::|\*\*|\S)"
        r"|(?P<space>\s+)",
        re.MULTILINE,
    )

    def lex(self, source: str) -> List[Token]:
        tokens = []
        line = 1
        pos = 0
        while pos < len(source):
            match = self._pattern.match(source, pos)
            if match is None:  # pragma: no cover
                break
            text, kind = match.group(0), match.lastgroup
            newlines = text.count("\n")
            if kind == "block":
                tokens.append(Token("comment", text, line, line + newlines, "block"))
            elif kind == "line":
                tokens.append(Token("comment", text, line, line, "line"))
            elif kind == "string":
                tokens.append(Token("string", text, line, line + newlines))
            elif kind != "space":
                tokens.append(Token("code", text, line, line + newlines))
            line += newlines
            pos = match.end()
        return tokens

    def extract(self, source: str) -> List[ParsedFunction]:
        stream = self.lex(source)
        positions = [i for i, tok in enumerate(stream) if tok.kind != "comment"]
        code = [stream[i] for i in positions]
        functions = []
        for i, tok in enumerate(code):
            if tok.kind != "code" or tok.text != "def":
                continue
            end = self._matching_end(code, i)
            if end is None:
                continue
            name = None
            for j in range(i + 1, end):
                if code[j].line != tok.line or code[j].text == "(":
                    break
                if BraceLexer._is_ident(code[j]) and code[j].text != "self":
                    name = code[j].text
            if name is None:
                continue
            first, last = positions[i], positions[end]
            previous = positions[i - 1] if i > 0 else -1
            doc = BraceLexer._doc_between(stream[previous + 1:first], tok.line)
            functions.append(ParsedFunction(
                name=name,
                doc=doc,
                raw_comments=[RawComment(t.text, t.line, t.comment_kind)
                              for t in stream[first:last + 1] if t.kind == "comment"],
                code_tokens=[t.text for t in code[i:end + 1]],
                start_line=tok.line,
                end_line=stream[last].end_line,
            ))
        return functions

    def _matching_end(self, code: List[Token], i: int) -> Optional[int]:
        depth = 0
        for j in range(i, len(code)):
            tok = code[j]
            if tok.kind != "code":
                continue
            line_start = j == 0 or code[j - 1].line != tok.line
            prev = code[j - 1].text if j > 0 else ""
            if tok.text in self._ALWAYS_OPEN:
                depth += 1
            elif tok.text in self._LINE_OPEN and (line_start or prev in ("=", "(", ",", "return", "||", "&&")):
                depth += 1
            elif tok.text == "end":
                depth -= 1
                if depth == 0:
                    return j
        return None


LEXERS: Dict[str, SourceLexer] = {
    "python": PythonLexer(),
    "java": JavaLexer(),
    "go": GoLexer(),
    "javascript": JavaScriptLexer(),
    "ruby": RubyLexer(),
    "php": PhpLexer(),
}

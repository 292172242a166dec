"""File discovery, cloc-style line counting and tree-sitter parsing.

Byte offsets everywhere refer to the raw file bytes. Line numbers are 1-based
and computed from our own line index (``\\n``, ``\\r\\n`` and lone ``\\r`` all
end a line), never from tree-sitter's row counter.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path, PurePosixPath
from typing import Iterable, Sequence

import numpy as np
import tree_sitter
import tree_sitter_javascript
import tree_sitter_typescript

from .errors import ParseError
from .kernels import BLANK, CODE, COMMENT, classify_lines

log = logging.getLogger(__name__)

EXTENSIONS = (".js", ".jsx", ".mjs", ".cjs", ".ts", ".tsx", ".mts", ".cts")
DEFAULT_EXCLUSIONS = ("node_modules", "coverage", "build", "bin", "stories", "dist", "3rdParty")

# Node kinds collected into SourceUnit.index by a single tree query; every
# analysis pass reads these lists instead of re-walking the tree.
INDEXED_KINDS = (
    "program",
    "comment",
    "html_comment",
    # functions and scopes
    "function_declaration",
    "generator_function_declaration",
    "function_expression",
    "generator_function",
    "arrow_function",
    "method_definition",
    "statement_block",
    "for_statement",
    "for_in_statement",
    "catch_clause",
    "switch_body",
    "class_static_block",
    "class_declaration",
    "class",
    # declarations
    "variable_declaration",
    "lexical_declaration",
    "import_statement",
    "enum_declaration",
    "internal_module",
    # writes and dynamic scope
    "assignment_expression",
    "augmented_assignment_expression",
    "update_expression",
    "with_statement",
    # detector sites
    "call_expression",
    "new_expression",
    "spread_element",
    "return_statement",
)


@dataclass(frozen=True, order=True)
class Span:
    """Byte range ``[start_byte, end_byte)`` plus inclusive 1-based line range."""

    start_byte: int
    end_byte: int
    start_line: int
    end_line: int

    def contains(self, other: "Span") -> bool:
        return self.start_byte <= other.start_byte and other.end_byte <= self.end_byte

    def intersects(self, other: "Span") -> bool:
        return self.start_byte < other.end_byte and other.start_byte < self.end_byte


@dataclass
class LocStats:
    total_files: int = 0
    code_lines: int = 0
    blank_lines: int = 0
    comment_lines: int = 0

    @property
    def physical_lines(self) -> int:
        return self.code_lines + self.blank_lines + self.comment_lines

    def __add__(self, other: "LocStats") -> "LocStats":
        return LocStats(
            self.total_files + other.total_files,
            self.code_lines + other.code_lines,
            self.blank_lines + other.blank_lines,
            self.comment_lines + other.comment_lines,
        )


class LineIndex:
    """Line starts and per-line BLANK/COMMENT/CODE classes of one file."""

    __slots__ = ("line_starts", "classes", "size")

    def __init__(self, data: bytes):
        self.line_starts, self.classes = classify_lines(data)
        self.size = len(data)

    @property
    def n_lines(self) -> int:
        return int(self.classes.shape[0])

    def byte_to_line(self, offset: int) -> int:
        return int(np.searchsorted(self.line_starts, offset, side="right"))

    def span(self, start_byte: int, end_byte: int) -> Span:
        start_line = self.byte_to_line(start_byte)
        end_line = self.byte_to_line(end_byte - 1) if end_byte > start_byte else start_line
        return Span(start_byte, end_byte, start_line, end_line)

    def stats(self) -> LocStats:
        counts = np.bincount(self.classes, minlength=3) if self.n_lines else np.zeros(3, int)
        return LocStats(1, int(counts[CODE]), int(counts[BLANK]), int(counts[COMMENT]))


@dataclass(frozen=True)
class CommentRecordRaw:
    span: Span
    text: str
    block: bool


@dataclass(eq=False)
class SourceUnit:
    """One parsed source file; immutable once built by :func:`parse`."""

    path: str
    data: bytes
    lines: LineIndex
    tree: tree_sitter.Tree
    index: dict[str, list[tree_sitter.Node]]
    comments: list[CommentRecordRaw] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return self.data.decode("utf-8", errors="replace")

    @property
    def line_starts(self) -> np.ndarray:
        return self.lines.line_starts

    @property
    def root(self) -> tree_sitter.Node:
        return self.tree.root_node

    def nodes(self, kind: str) -> list[tree_sitter.Node]:
        return self.index.get(kind, [])

    def span(self, node: tree_sitter.Node) -> Span:
        return self.lines.span(node.start_byte, node.end_byte)

    def node_text(self, node: tree_sitter.Node) -> str:
        return self.data[node.start_byte : node.end_byte].decode("utf-8", errors="replace")


# --------------------------------------------------------------------------
# discovery and LOC


def is_analyzable(
    relpath: str,
    extensions: Sequence[str] = EXTENSIONS,
    exclusions: Iterable[str] = DEFAULT_EXCLUSIONS,
) -> bool:
    """Extension filter plus path-segment exclusion on a repo-relative path."""
    p = PurePosixPath(relpath)
    if p.suffix not in extensions:
        return False
    excluded = set(exclusions)
    return not any(part in excluded for part in p.parts[:-1])


def discover_files(
    root: str | os.PathLike,
    extensions: Sequence[str] = EXTENSIONS,
    exclusions: Iterable[str] = DEFAULT_EXCLUSIONS,
    warnings: list[str] | None = None,
) -> list[str]:
    """Repo-relative POSIX paths of analyzable files under ``root``, sorted."""
    root = Path(root)
    if not root.is_dir():
        raise OSError(f"not a readable directory: {root}")
    excluded = set(exclusions)
    found: list[str] = []

    def onerror(exc: OSError) -> None:
        if Path(exc.filename or "") == root:
            raise exc
        msg = f"skipped unreadable path {exc.filename}: {exc.strerror}"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)

    for dirpath, dirnames, filenames in os.walk(root, onerror=onerror):
        dirnames[:] = sorted(d for d in dirnames if d not in excluded and d != ".git")
        rel_dir = Path(dirpath).relative_to(root)
        for name in filenames:
            rel = (rel_dir / name).as_posix()
            if is_analyzable(rel, extensions, excluded):
                found.append(rel)
    return sorted(found)


def read_source(path: str | os.PathLike, warnings: list[str] | None = None) -> bytes | None:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        msg = f"skipped unreadable file {path}: {exc.strerror}"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
        return None


def count_loc(
    files: Iterable[str | os.PathLike],
    root: str | os.PathLike | None = None,
    warnings: list[str] | None = None,
) -> LocStats:
    """cloc-style counts over ``files`` (paths relative to ``root`` if given)."""
    total = LocStats()
    for f in files:
        path = Path(root, f) if root is not None else Path(f)
        data = read_source(path, warnings)
        if data is None:
            continue
        try:
            data.decode("utf-8")
        except UnicodeDecodeError:
            msg = f"{f}: invalid UTF-8, decoded lossily"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
        total = total + LineIndex(data).stats()
    return total


# --------------------------------------------------------------------------
# parsing


@lru_cache(maxsize=None)
def _language(grammar: str) -> tree_sitter.Language:
    if grammar == "javascript":
        return tree_sitter.Language(tree_sitter_javascript.language())
    if grammar == "typescript":
        return tree_sitter.Language(tree_sitter_typescript.language_typescript())
    return tree_sitter.Language(tree_sitter_typescript.language_tsx())


def grammar_for(path: str) -> str:
    suffix = PurePosixPath(path).suffix
    if suffix in (".ts", ".mts", ".cts"):
        return "typescript"
    if suffix == ".tsx":
        return "tsx"
    return "javascript"


@lru_cache(maxsize=None)
def _index_query(grammar: str) -> tree_sitter.Query:
    lang = _language(grammar)
    kinds = [k for k in INDEXED_KINDS if lang.id_for_node_kind(k, True)]
    return tree_sitter.Query(lang, " ".join(f"({k}) @{k}" for k in kinds))


_parsers: dict[str, tree_sitter.Parser] = {}


def _parser(grammar: str) -> tree_sitter.Parser:
    # Parser objects are not thread-safe; one per grammar per process.
    p = _parsers.get(grammar)
    if p is None:
        p = _parsers[grammar] = tree_sitter.Parser(_language(grammar))
    return p


def _first_error(node: tree_sitter.Node) -> tree_sitter.Node | None:
    stack = [node]
    while stack:
        n = stack.pop()
        if n.is_error or n.is_missing:
            return n
        if n.has_error:
            stack.extend(reversed(n.children))
    return None


def parse(path: str, data: bytes | str) -> SourceUnit:
    """Parse one file; raises :class:`ParseError` on any syntax error."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    warnings: list[str] = []
    try:
        data.decode("utf-8")
    except UnicodeDecodeError:
        warnings.append(f"{path}: invalid UTF-8, decoded lossily")
    lines = LineIndex(data)
    src = data
    if src.startswith(b"\xef\xbb\xbf"):
        src = b"   " + src[3:]  # keep offsets stable
    grammar = grammar_for(path)
    tree = _parser(grammar).parse(src)
    root = tree.root_node
    if root.has_error:
        bad = _first_error(root)
        line = lines.byte_to_line(bad.start_byte) if bad is not None else None
        what = "missing token" if bad is not None and bad.is_missing else "syntax error"
        raise ParseError(path, what, line)

    captures = tree_sitter.QueryCursor(_index_query(grammar)).captures(root)
    index = {k: sorted(v, key=lambda n: (n.start_byte, -n.end_byte)) for k, v in captures.items()}
    comments = []
    for node in sorted(index.get("comment", []) + index.get("html_comment", []), key=lambda n: n.start_byte):
        text = data[node.start_byte : node.end_byte].decode("utf-8", errors="replace")
        comments.append(
            CommentRecordRaw(lines.span(node.start_byte, node.end_byte), text, text.startswith("/*"))
        )
    return SourceUnit(path, data, lines, tree, index, comments, warnings)

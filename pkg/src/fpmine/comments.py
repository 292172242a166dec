"""Comment extraction, FP adjacency and the comment-size correlation.

Every comment token is taken straight from the parse tree. A comment with
code before it on its own line is *trailing* and belongs to the nodes ending
at that code; any other comment is *leading* and belongs to the nodes
starting at the next token. Of those candidate owners (outermost first) we
keep the first FP-adjacent one and the first non-adjacent one, so a comment
yields at most one record per class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from tree_sitter import Node

from .detectors import CORE_CONCEPTS, Concept, FpOccurrence
from .source import SourceUnit, Span
from .stats import TestResult, point_biserial

_JSDOC_TAG = re.compile(r"(?:^|[\s*{])@[A-Za-z][\w-]*")
_WS = frozenset(b" \t\r\n\v\f")

#: row order of the correlation table
TABLE_CONCEPTS = (
    Concept.RECURSION,
    Concept.LAZY_EVALUATION,
    Concept.HIGHER_ORDER_FUNCTIONS,
    Concept.CALLBACKS_PROMISES,
    Concept.IMMUTABILITY,
)


@dataclass(frozen=True)
class CommentRecord:
    file: str
    span: Span
    kind: str  # "leading" | "trailing"
    text: str
    size_chars: int
    size_lines: int
    has_jsdoc_tag: bool
    adjacent_fp: bool
    owner_node_span: Span


def strip_delimiters(text: str) -> str:
    if text.startswith("//"):
        return text[2:]
    if text.startswith("/*"):
        body = text[2:]
        return body[:-2] if body.endswith("*/") else body
    if text.startswith("<!--"):
        body = text[4:]
        return body[:-3] if body.endswith("-->") else body
    return text


def has_jsdoc_tag(text: str) -> bool:
    if not text.startswith("/**") or text.startswith("/**/"):
        return False
    return _JSDOC_TAG.search(strip_delimiters(text)[1:]) is not None


@dataclass
class _Candidates:
    kind: str
    nodes: list[Span]


def _owner_candidates(unit: SourceUnit, span: Span, ends: dict[int, int], starts: dict[int, int]) -> _Candidates:
    data = unit.data
    root = unit.root
    line_start = int(unit.line_starts[span.start_line - 1])

    # is there code before the comment on its line?
    p = span.start_byte - 1
    while p >= line_start:
        if data[p] in _WS:
            p -= 1
        elif (p + 1) in ends:
            p = ends[p + 1] - 1
        else:
            break
    if p >= line_start:
        end = p + 1
        n: Node | None = root.descendant_for_byte_range(p, end)
        chain: list[Node] = []
        while n is not None and n.end_byte == end and n.id != root.id:
            if n.is_named and n.type not in ("comment", "html_comment"):
                chain.append(n)
            n = n.parent
        return _Candidates("trailing", [unit.span(c) for c in reversed(chain)] or [_container(unit, span)])

    q = span.end_byte
    size = len(data)
    while q < size:
        if data[q] in _WS:
            q += 1
        elif q in starts:
            q = starts[q]
        else:
            break
    if q >= size:
        return _Candidates("leading", [Span(size, size, span.end_line, span.end_line)])
    n = root.descendant_for_byte_range(q, q + 1)
    chain = []
    while n is not None and n.start_byte == q and n.id != root.id:
        if n.is_named:
            chain.append(n)
        n = n.parent
    return _Candidates("leading", [unit.span(c) for c in reversed(chain)] or [_container(unit, span)])


def _container(unit: SourceUnit, span: Span) -> Span:
    node = unit.root.descendant_for_byte_range(span.start_byte, span.end_byte)
    parent = node.parent if node is not None else None
    if parent is None or parent.id == unit.root.id:
        return Span(span.start_byte, span.start_byte, span.start_line, span.start_line)
    return unit.span(parent)


def extract_comment_views(
    unit: SourceUnit, occs: Sequence[FpOccurrence]
) -> dict[Concept | None, list[CommentRecord]]:
    """Comment records for the pooled view (key None) and each core concept."""
    core = [o for o in occs if o.concept is not Concept.CONST_DECLARATION]
    ext_start = np.array([o.extent_span.start_byte for o in core], dtype=np.int64)
    ext_end = np.array([o.extent_span.end_byte for o in core], dtype=np.int64)
    ext_concept = np.array([CORE_CONCEPTS.index(o.concept) for o in core], dtype=np.int64)

    # comment end -> start and start -> end, to skip over neighbouring comments
    ends = {c.span.end_byte: c.span.start_byte for c in unit.comments}
    starts = {c.span.start_byte: c.span.end_byte for c in unit.comments}

    views: dict[Concept | None, list[CommentRecord]] = {None: []}
    for c in CORE_CONCEPTS:
        views[c] = []
    for raw in unit.comments:
        cand = _owner_candidates(unit, raw.span, ends, starts)
        concept_sets = []
        for owner in cand.nodes:
            hit = (ext_start < owner.end_byte) & (ext_end > owner.start_byte)
            concept_sets.append(frozenset(CORE_CONCEPTS[i] for i in np.unique(ext_concept[hit])))
        body = strip_delimiters(raw.text)
        common = dict(
            file=unit.path,
            span=raw.span,
            kind=cand.kind,
            text=raw.text,
            size_chars=len(body),
            size_lines=raw.span.end_line - raw.span.start_line + 1,
            has_jsdoc_tag=has_jsdoc_tag(raw.text),
        )
        for view, records in views.items():
            seen: set[bool] = set()
            for owner, concepts in zip(cand.nodes, concept_sets):
                fp = bool(concepts) if view is None else view in concepts
                if fp in seen:
                    continue
                seen.add(fp)
                records.append(CommentRecord(adjacent_fp=fp, owner_node_span=owner, **common))
    return views


def extract_comments(
    unit: SourceUnit, occs: Sequence[FpOccurrence], concept: Concept | None = None
) -> list[CommentRecord]:
    """Deduplicated comment records; adjacency restricted to ``concept`` if given."""
    return extract_comment_views(unit, occs)[concept]


class InsufficientData(ValueError):
    """Too few records, or only one adjacency class, to correlate."""


def correlate(records: Iterable[CommentRecord], kind: str | None = None) -> TestResult:
    """Point-biserial correlation of comment size against FP adjacency.

    JSDoc-tagged comments are excluded. Equal-sized comments give r = 0, p = 1.
    """
    kept = [r for r in records if not r.has_jsdoc_tag and (kind is None or r.kind == kind)]
    groups = [1 if r.adjacent_fp else 0 for r in kept]
    n1 = sum(groups)
    if len(kept) < 3 or n1 == 0 or n1 == len(kept):
        raise InsufficientData(f"need >=3 comments in both classes (have {n1} FP, {len(kept) - n1} non-FP)")
    values = [float(r.size_chars) for r in kept]
    if min(values) == max(values):
        return TestResult(0.0, 1.0, len(kept) - 2, {"flag": "zero-variance"})
    return point_biserial(values, groups)


@dataclass
class CorrelationRow:
    label: str
    result: TestResult | None
    n_fp: int
    n_nonfp: int
    excluded_jsdoc: int
    flag: str = ""


def correlation_table(
    views: dict[Concept | None, list[CommentRecord]], kind: str | None = None
) -> list[CorrelationRow]:
    """One row per concept and a final pooled "All" row."""
    rows = []
    for view in TABLE_CONCEPTS + (None,):
        records = [r for r in views.get(view, []) if kind is None or r.kind == kind]
        kept = [r for r in records if not r.has_jsdoc_tag]
        n_fp = sum(1 for r in kept if r.adjacent_fp)
        row = CorrelationRow(
            view.value if view is not None else "All",
            None,
            n_fp,
            len(kept) - n_fp,
            len(records) - len(kept),
        )
        try:
            row.result = correlate(records, kind)
            row.flag = row.result.extras.get("flag", "")
        except InsufficientData:
            row.flag = "single-class" if kept else "no-comments"
        rows.append(row)
    return rows

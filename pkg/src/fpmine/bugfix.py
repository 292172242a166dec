"""Bug-fix vs. non-bug-fix commits and FP-structure removals (2x2 analysis)."""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .detectors import CORE_CONCEPTS, Concept
from .errors import ConfigError, GitError
from .gitrepo import GitRepo
from .history import SnapshotAnalyzer
from .stats import TestResult, chi_square_2x2, odds_ratio

log = logging.getLogger(__name__)

BUG_TERMS = ("bug", "error", "defect", "failure", "fault", "exception")
_BUG_RE = re.compile(r"(?<![a-z0-9])(?:" + "|".join(BUG_TERMS) + r")(?![a-z0-9])")
_NOT_RE = re.compile(r"(?<![a-z0-9])not(?![a-z0-9])")
DEFAULT_LIMIT = 1000


def classify_label(label: str) -> str:
    """``"bug"`` or ``"not-bug"``; terms match as whole alphanumeric tokens."""
    s = label.lower()
    if "unconfirmed" in s or _NOT_RE.search(s):
        return "not-bug"
    return "bug" if _BUG_RE.search(s) else "not-bug"


def is_bug_labelled(labels: Iterable[str]) -> bool:
    return any(classify_label(lab) == "bug" for lab in labels)


# -- issue exports ------------------------------------------------------------

def parse_time(value) -> int:
    if isinstance(value, (int, float)):
        return int(value)
    s = str(value).strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_time(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class IssueExport:
    id: str
    labels: tuple[str, ...]
    closing_commit_sha: str | None
    closed_at: int  # epoch seconds
    kind: str = "issue"  # "issue" | "pull-request"

    @classmethod
    def from_dict(cls, d: Mapping) -> "IssueExport":
        try:
            kind = d.get("kind", "issue")
            if kind not in ("issue", "pull-request"):
                raise ValueError(f"bad kind {kind!r}")
            labels = d.get("labels") or []
            if isinstance(labels, str) or not all(isinstance(x, str) for x in labels):
                raise ValueError("labels must be a list of strings")
            sha = d.get("closing_commit_sha") or None
            return cls(str(d["id"]), tuple(labels), sha, parse_time(d["closed_at"]), kind)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed issue export record: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "labels": list(self.labels),
            "closing_commit_sha": self.closing_commit_sha,
            "closed_at": format_time(self.closed_at),
            "kind": self.kind,
        }


def read_exports(source: str | Path | IO[str]) -> list[IssueExport]:
    """Read NDJSON; blank lines are skipped, unknown fields ignored."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()  # type: ignore[union-attr]
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    out = []
    for no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {no}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"line {no}: expected a JSON object")
        out.append(IssueExport.from_dict(obj))
    return out


def write_exports(exports: Iterable[IssueExport], fh: IO[str]) -> int:
    n = 0
    for e in exports:
        fh.write(json.dumps(e.to_dict(), sort_keys=True) + "\n")
        n += 1
    return n


@dataclass
class Partition:
    bugfix: list[str] = field(default_factory=list)
    nonbugfix: list[str] = field(default_factory=list)
    #: shas closing items of both classes (kept as bug-fix)
    conflicts: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter((self.bugfix, self.nonbugfix))


def partition_commits(exports: Sequence[IssueExport], limit: int = DEFAULT_LIMIT) -> Partition:
    """Split closing commits into bug-fix and non-bug-fix sets.

    Each class keeps its ``limit`` most recently closed items that have a
    closing commit. A commit closing items of both classes counts as bug-fix.
    """
    ordered = sorted(exports, key=lambda e: (-e.closed_at, e.id))
    part = Partition()
    taken = {True: 0, False: 0}
    shas: dict[bool, dict[str, None]] = {True: {}, False: {}}
    for e in ordered:
        if not e.closing_commit_sha:
            msg = f"{e.kind} {e.id}: no closing commit, skipped"
            log.warning(msg)
            part.warnings.append(msg)
            continue
        bug = is_bug_labelled(e.labels)
        if taken[bug] >= limit:
            continue
        taken[bug] += 1
        shas[bug].setdefault(e.closing_commit_sha)
    both = [s for s in shas[False] if s in shas[True]]
    part.bugfix = list(shas[True])
    part.nonbugfix = [s for s in shas[False] if s not in shas[True]]
    part.conflicts = both
    for s in both:
        msg = f"commit {s[:12]} closes both bug and non-bug items; counted as bug-fix"
        log.warning(msg)
        part.warnings.append(msg)
    return part


# -- removals -----------------------------------------------------------------

@dataclass
class CommitRecord:
    sha: str
    parent_sha: str
    is_bugfix: bool
    removals: dict[Concept, int]


class UnreliableSnapshot(Exception):
    """A file that changed between parent and child does not parse."""


def removals_between(
    analyzer: SnapshotAnalyzer | GitRepo, sha: str, concepts: Sequence[Concept] = CORE_CONCEPTS
) -> tuple[str, dict[Concept, int]] | None:
    """``(parent_sha, removals)`` against the first parent; None for a root commit.

    Raises :class:`UnreliableSnapshot` when a file differing between the two
    trees fails to parse on either side. Unparsable files identical on both
    sides contribute nothing to the delta and are ignored.
    """
    if isinstance(analyzer, GitRepo):
        analyzer = SnapshotAnalyzer(analyzer)
    repo = analyzer.repo
    full = repo.resolve(sha)
    if full is None:
        raise GitError(f"unknown commit {sha}")
    parent = repo.first_parent(full)
    if parent is None:
        return None
    child_entries = analyzer.entries(full)
    parent_entries = analyzer.entries(parent)
    child = analyzer.file_results(child_entries)
    par = analyzer.file_results(parent_entries)
    child_blobs = {e.path: e.blob for e in child_entries}
    parent_blobs = {e.path: e.blob for e in parent_entries}
    broken = sorted(
        {p for p, (fm, _) in child.items() if fm is None and parent_blobs.get(p) != child_blobs[p]}
        | {p for p, (fm, _) in par.items() if fm is None and child_blobs.get(p) != parent_blobs[p]}
    )
    if broken:
        raise UnreliableSnapshot(f"{full[:12]}: changed files fail to parse: {', '.join(broken)}")

    def counts(results) -> dict[Concept, int]:
        tot = {c: 0 for c in concepts}
        for fm, _ in results.values():
            if fm is not None:
                for c in concepts:
                    tot[c] += fm.per_concept[c].occurrences
        return tot

    before, after = counts(par), counts(child)
    return parent, {c: max(0, before[c] - after[c]) for c in concepts}


def commit_records(
    analyzer: SnapshotAnalyzer,
    partition: Partition,
    concepts: Sequence[Concept] = CORE_CONCEPTS,
) -> tuple[list[CommitRecord], list[str]]:
    """Records for every partitioned commit; returns (records, warnings)."""
    records, warnings = [], []
    for is_bug, shas in ((True, partition.bugfix), (False, partition.nonbugfix)):
        for sha in shas:
            try:
                res = removals_between(analyzer, sha, concepts)
            except (GitError, UnreliableSnapshot) as exc:
                msg = f"commit {sha[:12]} excluded: {exc}"
                log.warning(msg)
                warnings.append(msg)
                continue
            if res is None:
                msg = f"commit {sha[:12]} excluded: root commit"
                log.info(msg)
                warnings.append(msg)
                continue
            records.append(CommitRecord(sha, res[0], is_bug, res[1]))
    return records, warnings


# -- tables and tests ---------------------------------------------------------

@dataclass(frozen=True)
class ContingencyTable2x2:
    a: int  # bug-fix, removed
    b: int  # bug-fix, not removed
    c: int  # non-bug-fix, removed
    d: int  # non-bug-fix, not removed

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("contingency cells must be non-negative")

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def swapped(self) -> "ContingencyTable2x2":
        return ContingencyTable2x2(self.c, self.d, self.a, self.b)


def build_tables(
    records: Iterable[CommitRecord], concepts: Sequence[Concept] = CORE_CONCEPTS
) -> dict[Concept, ContingencyTable2x2]:
    cells = {c: [0, 0, 0, 0] for c in concepts}
    for r in records:
        for c in concepts:
            removed = r.removals.get(c, 0) > 0
            idx = (0 if removed else 1) if r.is_bugfix else (2 if removed else 3)
            cells[c][idx] += 1
    return {c: ContingencyTable2x2(*v) for c, v in cells.items()}


@dataclass
class BugAnalysis:
    table: ContingencyTable2x2
    test: TestResult | None
    significant: bool
    odds_ratio: float | None
    flags: list[str] = field(default_factory=list)

    @property
    def p_value(self) -> float | None:
        return None if self.test is None else self.test.p_value

    @property
    def chi2(self) -> float | None:
        return None if self.test is None else self.test.statistic


def analyze(
    tables: Mapping[Concept, ContingencyTable2x2],
    alpha: float = 0.05,
    m: int = 5,
    correction: bool = False,
) -> dict[Concept, BugAnalysis]:
    """Chi-square and odds ratio per concept at the Bonferroni level alpha / m."""
    level = alpha / m
    out = {}
    for concept, t in tables.items():
        flags: list[str] = []
        try:
            test = chi_square_2x2(t, correction=correction)
        except ValueError:
            test = None
            flags.append("degenerate")
        try:
            ratio: float | None = odds_ratio(t)
            if 0 in (t.a, t.b, t.c, t.d):
                flags.append("zero-cell")
        except ValueError:
            if t.a + t.b + t.c + t.d == 0:
                ratio = None
            else:
                ratio = odds_ratio(t, correction="haldane")
                flags.append("haldane")
        out[concept] = BugAnalysis(t, test, test is not None and test.p_value < level, ratio, flags)
    return out


def pct_less_likely(ratio: float) -> float:
    """(1 - OR) * 100: how much less likely removal is in bug-fix commits."""
    return (1.0 - ratio) * 100.0


def render_less_likely(ratio: float, digits: int = 2) -> str:
    if math.isinf(ratio):
        return "infinitely more likely"
    if ratio < 1:
        return f"{pct_less_likely(ratio):.{digits}f}% less likely"
    if ratio > 1:
        return f"{(ratio - 1.0) * 100.0:.{digits}f}% more likely"
    return "equally likely"

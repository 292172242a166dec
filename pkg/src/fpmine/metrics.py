"""Per-structure / per-concept occurrence counts and LOC-union sizes."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .detectors import CORE_CONCEPTS, STRUCTURE_CONCEPT, STRUCTURES, Concept, FpOccurrence
from .errors import ConsistencyError
from .kernels import CODE, union_count
from .source import LineIndex, LocStats, SourceUnit


@dataclass
class Tally:
    occurrences: int = 0
    loc_lines: int = 0

    def __iadd__(self, other: "Tally") -> "Tally":
        self.occurrences += other.occurrences
        self.loc_lines += other.loc_lines
        return self


def _matches(occ: FpOccurrence, which) -> bool:
    if which is None or which == "all":
        return occ.concept is not Concept.CONST_DECLARATION
    if isinstance(which, Concept):
        return occ.concept is which
    return occ.structure == which


def loc_union(
    occs: Iterable[FpOccurrence],
    which: Concept | str | None = None,
    lines: Mapping[str, LineIndex] | None = None,
) -> int:
    """Distinct ``(file, line)`` pairs covered by the extents of ``occs``.

    ``which`` selects a concept, a structure name, or ``"all"`` (the default;
    excludes the opt-in const-decl structure). With ``lines`` given, only
    CODE-classified lines count; without it, every covered line counts.
    """
    by_file: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for o in occs:
        if _matches(o, which):
            by_file[o.file].append((o.extent_span.start_line, o.extent_span.end_line))
    total = 0
    for path, spans in by_file.items():
        arr = np.asarray(spans, dtype=np.int64)
        if lines is None:
            classes = np.full(int(arr[:, 1].max()), CODE, dtype=np.int8)
        else:
            if path not in lines:
                raise ConsistencyError(f"occurrence in unknown file {path!r}")
            classes = lines[path].classes
        total += union_count(arr[:, 0], arr[:, 1], classes)
    return total


@dataclass
class FileMetrics:
    """Counts for one file; the unit that snapshot analysis caches per blob."""

    path: str
    loc: LocStats
    per_structure: dict[str, Tally]
    per_concept: dict[Concept, Tally]
    fp_total: Tally
    callback_call_sites: int = 0


def file_metrics(
    path: str,
    lines: LineIndex,
    occs: Sequence[FpOccurrence],
    callback_call_sites: int = 0,
) -> FileMetrics:
    lookup = {path: lines}
    for o in occs:
        if o.file != path:
            raise ConsistencyError(f"occurrence from {o.file!r} passed for {path!r}")
    per_structure = {}
    for s in STRUCTURES:
        n = sum(1 for o in occs if o.structure == s)
        per_structure[s] = Tally(n, loc_union(occs, s, lookup) if n else 0)
    per_concept = {}
    for c in Concept:
        n = sum(1 for o in occs if o.concept is c)
        per_concept[c] = Tally(n, loc_union(occs, c, lookup) if n else 0)
    core = [o for o in occs if o.concept is not Concept.CONST_DECLARATION]
    fp_total = Tally(len(core), loc_union(core, "all", lookup) if core else 0)
    return FileMetrics(path, lines.stats(), per_structure, per_concept, fp_total, callback_call_sites)


@dataclass
class SnapshotMetrics:
    snapshot_id: str = "worktree"
    timestamp: int | None = None
    loc: LocStats = field(default_factory=LocStats)
    per_structure: dict[str, Tally] = field(default_factory=lambda: {s: Tally() for s in STRUCTURES})
    per_concept: dict[Concept, Tally] = field(default_factory=lambda: {c: Tally() for c in Concept})
    fp_total: Tally = field(default_factory=Tally)
    callback_call_sites: int = 0
    skipped_files: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def total_loc(self) -> int:
        return self.loc.code_lines

    @property
    def density(self) -> float | None:
        """Code lines per FP occurrence; absent when there are no occurrences."""
        if self.fp_total.occurrences == 0:
            return None
        return self.total_loc / self.fp_total.occurrences

    def pct_loc(self, which: Concept | str | None = None) -> float:
        if self.total_loc == 0:
            return 0.0
        if which is None or which == "all":
            lines = self.fp_total.loc_lines
        elif isinstance(which, Concept):
            lines = self.per_concept[which].loc_lines
        else:
            lines = self.per_structure[which].loc_lines
        return lines / self.total_loc

    def normalized(self, concept: Concept) -> float:
        """Concept LOC over total code lines: the per-snapshot evolution series value."""
        return self.pct_loc(concept)

    def add(self, fm: FileMetrics) -> None:
        self.loc = self.loc + fm.loc
        for s, t in fm.per_structure.items():
            self.per_structure[s] += t
        for c, t in fm.per_concept.items():
            self.per_concept[c] += t
        self.fp_total += fm.fp_total
        self.callback_call_sites += fm.callback_call_sites

    def to_dict(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "timestamp": self.timestamp,
            "files": self.loc.total_files,
            "skipped_files": list(self.skipped_files),
            "total_loc": self.total_loc,
            "blank_lines": self.loc.blank_lines,
            "comment_lines": self.loc.comment_lines,
            "fp_total": {
                "occurrences": self.fp_total.occurrences,
                "loc_union_lines": self.fp_total.loc_lines,
                "pct_loc": self.pct_loc(),
            },
            "density": self.density,
            "callback_call_sites": self.callback_call_sites,
            "per_concept": {
                c.value: {"occurrences": t.occurrences, "loc_lines": t.loc_lines, "pct_loc": self.pct_loc(c)}
                for c, t in self.per_concept.items()
            },
            "per_structure": {
                s: {"occurrences": t.occurrences, "loc_lines": t.loc_lines, "pct_loc": self.pct_loc(s)}
                for s, t in self.per_structure.items()
            },
            "flags": list(self.flags),
        }


def merge(
    files: Iterable[FileMetrics],
    snapshot_id: str = "worktree",
    timestamp: int | None = None,
    skipped: Iterable[str] = (),
) -> SnapshotMetrics:
    snap = SnapshotMetrics(snapshot_id, timestamp)
    for fm in files:
        snap.add(fm)
    snap.skipped_files = sorted(skipped)
    if snap.loc.total_files == 0:
        snap.flags.append("no-analyzable-files")
    return snap


def summarize(
    units: Sequence[SourceUnit],
    occs: Sequence[FpOccurrence],
    loc: LocStats | None = None,
    snapshot_id: str = "worktree",
    timestamp: int | None = None,
) -> SnapshotMetrics:
    """Aggregate occurrences of ``units`` into one :class:`SnapshotMetrics`.

    ``loc`` must describe the same file set; when given, it is checked
    against the units' own line counts.
    """
    known = {u.path: u for u in units}
    by_file: dict[str, list[FpOccurrence]] = defaultdict(list)
    for o in occs:
        if o.file not in known:
            raise ConsistencyError(f"occurrence in unknown file {o.file!r}")
        by_file[o.file].append(o)
    snap = merge(
        (file_metrics(u.path, u.lines, by_file.get(u.path, [])) for u in units),
        snapshot_id,
        timestamp,
    )
    if loc is not None and loc.code_lines != snap.loc.code_lines:
        raise ConsistencyError(
            f"LocStats covers {loc.code_lines} code lines but units have {snap.loc.code_lines}"
        )
    return snap


def concept_rows(snap: SnapshotMetrics) -> list[tuple[str, str, Tally, float]]:
    """(concept, structure, tally, pct_loc) rows grouped like the prevalence table."""
    rows = []
    for concept in CORE_CONCEPTS + (Concept.CONST_DECLARATION,):
        members = [s for s in STRUCTURES if STRUCTURE_CONCEPT[s] is concept]
        for s in members:
            rows.append((concept.value, s, snap.per_structure[s], snap.pct_loc(s)))
        if len(members) > 1:
            rows.append((concept.value, "total", snap.per_concept[concept], snap.pct_loc(concept)))
    rows.append(("All", "total", snap.fp_total, snap.pct_loc()))
    return rows

"""Monthly snapshot planning, per-snapshot measurement and evolution summaries."""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .detectors import CORE_CONCEPTS, Concept, DetectorPolicy
from .gitrepo import GitRepo, TreeEntry
from .metrics import FileMetrics, SnapshotMetrics, merge
from .pipeline import analyze_source
from .source import DEFAULT_EXCLUSIONS, EXTENSIONS, grammar_for, is_analyzable
from .stats import geometric_mean

log = logging.getLogger(__name__)

DEFAULT_ANCHOR = 61.5


@dataclass(frozen=True)
class Snapshot:
    sha: str
    timestamp: int

    @property
    def month(self) -> tuple[int, int]:
        d = datetime.fromtimestamp(self.timestamp, tz=timezone.utc)
        return d.year, d.month


@dataclass
class SnapshotPlan:
    repo: str
    snapshots: list[Snapshot]
    anchor: Snapshot | None = None  # HEAD


def plan_snapshots(repo: GitRepo | str | Path, rev: str = "HEAD") -> SnapshotPlan:
    """Latest first-parent commit of every calendar month (UTC), oldest first."""
    if not isinstance(repo, GitRepo):
        repo = GitRepo(repo)
    log_ = repo.first_parent_log(rev)
    if not log_:
        return SnapshotPlan(str(repo.path), [], None)
    picked: dict[tuple[int, int], Snapshot] = {}
    for c in log_:  # newest first, so the first hit per month is the latest
        snap = Snapshot(c.sha, c.timestamp)
        picked.setdefault(snap.month, snap)
    snaps = [picked[m] for m in sorted(picked)]
    # committer clocks can go backwards along the chain; keep the plan strictly increasing
    ordered: list[Snapshot] = []
    for s in snaps:
        if ordered and s.timestamp <= ordered[-1].timestamp:
            log.warning("dropping snapshot %s: timestamp not after previous month's", s.sha[:12])
            continue
        ordered.append(s)
    head = log_[0]
    return SnapshotPlan(str(repo.path), ordered, Snapshot(head.sha, head.timestamp))


def _analyze_blob(args: tuple[str, bytes, DetectorPolicy]) -> tuple[FileMetrics | None, str | None]:
    path, data, policy = args
    r = analyze_source(path, data, policy)
    return r.metrics, r.error


class SnapshotAnalyzer:
    """Measures commit trees, caching per-blob results across snapshots."""

    def __init__(
        self,
        repo: GitRepo,
        policy: DetectorPolicy | None = None,
        extensions: Sequence[str] = EXTENSIONS,
        exclusions: Iterable[str] = DEFAULT_EXCLUSIONS,
        executor: Executor | None = None,
    ):
        self.repo = repo
        self.policy = policy or DetectorPolicy()
        self.extensions = tuple(extensions)
        self.exclusions = tuple(exclusions)
        self.executor = executor
        # (blob sha, grammar) -> (metrics, error)
        self._cache: dict[tuple[str, str], tuple[FileMetrics | None, str | None]] = {}

    def entries(self, sha: str) -> list[TreeEntry]:
        return [
            e for e in self.repo.list_files(sha) if is_analyzable(e.path, self.extensions, self.exclusions)
        ]

    def file_results(self, entries: Sequence[TreeEntry]) -> dict[str, tuple[FileMetrics | None, str | None]]:
        todo: dict[tuple[str, str], str] = {}
        for e in entries:
            key = (e.blob, grammar_for(e.path))
            if key not in self._cache and key not in todo:
                todo[key] = e.path
        if todo:
            keys = list(todo)
            blobs = dict(self.repo.read_blobs(k[0] for k in keys))
            tasks = [(todo[k], blobs[k[0]], self.policy) for k in keys]
            if self.executor is not None and len(tasks) > 1:
                results = list(self.executor.map(_analyze_blob, tasks, chunksize=8))
            else:
                results = [_analyze_blob(t) for t in tasks]
            self._cache.update(zip(keys, results))
        return {e.path: self._cache[(e.blob, grammar_for(e.path))] for e in entries}

    def measure(self, sha: str, timestamp: int | None = None) -> SnapshotMetrics:
        per_file = self.file_results(self.entries(sha))
        snap = merge(
            (fm for fm, _ in per_file.values() if fm is not None),
            snapshot_id=sha,
            timestamp=timestamp,
            skipped=[p for p, (fm, _) in per_file.items() if fm is None],
        )
        if snap.flags:
            log.warning("snapshot %s: %s", sha[:12], ", ".join(snap.flags))
        return snap


def measure_snapshots(
    plan: SnapshotPlan,
    policy: DetectorPolicy | None = None,
    extensions: Sequence[str] = EXTENSIONS,
    exclusions: Iterable[str] = DEFAULT_EXCLUSIONS,
    jobs: int = 1,
) -> list[SnapshotMetrics]:
    repo = GitRepo(plan.repo)
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        analyzer = SnapshotAnalyzer(repo, policy, extensions, exclusions, pool)
        return [analyzer.measure(s.sha, s.timestamp) for s in plan.snapshots]
    finally:
        if pool is not None:
            pool.shutdown()


def evolution_ratios(series: Sequence[float]) -> tuple[list[float], int]:
    """Consecutive ratios over the non-zero values of ``series``.

    Zero entries are discarded and the next non-zero value is used instead.
    Returns ``(ratios, number_of_discarded_snapshots)``.
    """
    kept = [m for m in series if m != 0]
    discarded = len(series) - len(kept)
    ratios = [b / a for a, b in zip(kept, kept[1:])]
    return ratios, discarded


@dataclass
class ConceptEvolution:
    ratios: list[float]
    gmean: float | None
    steps_used: int
    steps_discarded: int

    def compound(self, steps: float = DEFAULT_ANCHOR) -> float | None:
        """gmean ** steps; fractional step counts are fine."""
        return None if self.gmean is None else self.gmean**steps


@dataclass
class EvolutionSummary:
    per_concept: dict[Concept | str, ConceptEvolution] = field(default_factory=dict)


def summarize_evolution(
    ratios: Mapping[Concept | str, tuple[Sequence[float], int] | Sequence[float]],
) -> EvolutionSummary:
    """Geometric mean of the step ratios for every concept.

    Values are either plain ratio lists or ``(ratios, discarded)`` pairs as
    returned by :func:`evolution_ratios`.
    """
    out = EvolutionSummary()
    for concept, value in ratios.items():
        if isinstance(value, tuple) and len(value) == 2 and isinstance(value[1], int):
            rs, discarded = list(value[0]), value[1]
        else:
            rs, discarded = list(value), 0  # type: ignore[arg-type]
        g = geometric_mean(rs) if rs else None
        out.per_concept[concept] = ConceptEvolution(rs, g, len(rs), discarded)
    return out


def concept_series(snaps: Sequence[SnapshotMetrics]) -> dict[Concept | str, list[float]]:
    """Normalized m_i per core concept plus the pooled "All" series."""
    series: dict[Concept | str, list[float]] = {c: [s.normalized(c) for s in snaps] for c in CORE_CONCEPTS}
    series["All"] = [s.pct_loc() for s in snaps]
    return series


def evolution(snaps: Sequence[SnapshotMetrics]) -> EvolutionSummary:
    return summarize_evolution({c: evolution_ratios(m) for c, m in concept_series(snaps).items()})


def compound(gmean: float, steps: float = DEFAULT_ANCHOR) -> float:
    if not gmean > 0 or math.isinf(gmean):
        raise ValueError("gmean must be positive and finite")
    return gmean**steps

"""parse -> scope -> detect -> per-file metrics, shared by every command."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .comments import CommentRecord, extract_comment_views
from .detectors import Concept, DetectorPolicy, FpOccurrence, count_callback_call_sites, detect_all
from .errors import ParseError
from .metrics import FileMetrics, SnapshotMetrics, file_metrics, merge
from .scopes import build_scopes
from .source import DEFAULT_EXCLUSIONS, EXTENSIONS, discover_files, parse, read_source

log = logging.getLogger(__name__)


@dataclass
class FileResult:
    path: str
    metrics: FileMetrics | None = None
    occurrences: list[FpOccurrence] = field(default_factory=list)
    #: comment records per adjacency view (None = any FP concept)
    comments: dict[Concept | None, list[CommentRecord]] | None = None
    error: str | None = None
    warnings: list[str] = field(default_factory=list)
    digest: str = ""


def analyze_source(
    path: str,
    data: bytes,
    policy: DetectorPolicy,
    with_comments: bool = False,
) -> FileResult:
    digest = hashlib.sha256(data).hexdigest()
    try:
        unit = parse(path, data)
    except ParseError as exc:
        log.warning("excluded %s", exc)
        return FileResult(path, error=str(exc), digest=digest)
    scopes = build_scopes(unit)
    occs = detect_all(unit, scopes, policy)
    fm = file_metrics(path, unit.lines, occs, count_callback_call_sites(unit, scopes))
    result = FileResult(path, fm, occs, warnings=list(unit.warnings), digest=digest)
    if with_comments:
        result.comments = extract_comment_views(unit, occs)
    return result


def _analyze_path(args: tuple[str, str, DetectorPolicy, bool]) -> FileResult:
    root, rel, policy, with_comments = args
    warnings: list[str] = []
    data = read_source(Path(root, rel), warnings)
    if data is None:
        return FileResult(rel, error=warnings[0] if warnings else "unreadable", warnings=warnings)
    return analyze_source(rel, data, policy, with_comments)


def analyze_tree(
    root: str | Path,
    policy: DetectorPolicy,
    extensions: Sequence[str] = EXTENSIONS,
    exclusions: Iterable[str] = DEFAULT_EXCLUSIONS,
    with_comments: bool = False,
    jobs: int = 1,
) -> tuple[SnapshotMetrics, list[FileResult], list[str]]:
    """Analyze every file under ``root``; returns (metrics, per-file results, warnings)."""
    warnings: list[str] = []
    files = discover_files(root, extensions, exclusions, warnings)
    tasks = [(str(root), rel, policy, with_comments) for rel in files]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_analyze_path, tasks, chunksize=16))
    else:
        results = [_analyze_path(t) for t in tasks]
    for r in results:
        warnings.extend(r.warnings)
    snap = merge(
        (r.metrics for r in results if r.metrics is not None),
        skipped=[r.path for r in results if r.metrics is None],
    )
    return snap, results, warnings

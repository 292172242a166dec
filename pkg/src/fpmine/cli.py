"""``fpmine`` command line.

    fpmine scan|history|fetch-issues|bugs|comments [--config FILE] [--root PATH]...
           [--include-const] [--unknown-policy include|exclude]
           [--format csv|json] [--out DIR] [--jobs N]

Exit status: 0 clean, 2 partial (files or commits skipped), 1 fatal.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bugfix import analyze, build_tables, commit_records, partition_commits, pct_less_likely, read_exports, write_exports
from .comments import CommentRecord, correlation_table
from .config import FORMATS, ScanConfig, expand_roots, load_config
from .detectors import CORE_CONCEPTS, Concept, DetectorPolicy
from .errors import ConfigError, FpmineError
from .gitrepo import GitRepo
from .history import SnapshotAnalyzer, concept_series, evolution, measure_snapshots, plan_snapshots
from .metrics import concept_rows
from .pipeline import analyze_tree
from .reports import ReportHeader, digest_of, file_digest, write_json, write_table

log = logging.getLogger("fpmine")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML or JSON config file")
    p.add_argument("--root", action="append", default=None, metavar="PATH",
                   help="repository or directory to analyze (repeatable; a file is read as a manifest)")
    p.add_argument("--include-const", action="store_true", default=None, help="also count const declarations")
    p.add_argument("--unknown-policy", choices=("include", "exclude"), default=None,
                   help="treat unresolved types as matching (include) or not (exclude)")
    p.add_argument("--format", action="append", default=None, choices=FORMATS, dest="formats",
                   help="output format (repeatable; default csv)")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpmine", description="Detect and measure functional-programming structures in JS/TS repositories.")
    parser.add_argument("--version", action="version", version=f"fpmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="prevalence of FP structures in the current tree")
    _common(p)

    p = sub.add_parser("history", help="monthly evolution of FP structures")
    _common(p)
    p.add_argument("--anchor", type=float, default=None, help="compounding exponent (default 61.5)")

    p = sub.add_parser("fetch-issues", help="export closed issues/PRs with closing commits as NDJSON")
    _common(p)
    p.add_argument("--repo", required=True, help="owner/name on the code host")
    p.add_argument("--api-url", default=None)
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("bugs", help="FP removals in bug-fix vs other commits")
    _common(p)
    p.add_argument("--exports", type=Path, action="append", required=True,
                   help="IssueExport NDJSON (one per --root, in order)")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--yates", action="store_true", help="apply the continuity correction")

    p = sub.add_parser("comments", help="comment size vs FP adjacency")
    _common(p)
    p.add_argument("--kind", choices=("leading", "trailing"), default=None)
    p.add_argument("--records", action="store_true", help="also write every comment record")
    return parser


def resolve_config(args: argparse.Namespace) -> ScanConfig:
    cfg = load_config(args.config) if args.config else ScanConfig()
    if args.root:
        cfg.roots = expand_roots(args.root)
    pol = cfg.policy
    if args.include_const is not None or args.unknown_policy is not None:
        cfg.policy = dataclasses.replace(
            pol,
            include_const=pol.include_const if args.include_const is None else True,
            unknown_policy=args.unknown_policy or pol.unknown_policy,
        )
    if args.formats:
        cfg.formats = tuple(dict.fromkeys(args.formats))
    if args.out is not None:
        cfg.out_dir = args.out
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if getattr(args, "anchor", None) is not None:
        cfg.anchor = args.anchor
    if getattr(args, "limit", None) is not None:
        cfg.limit = args.limit
    if getattr(args, "api_url", None):
        cfg.api_url = args.api_url
    if getattr(args, "kind", None):
        cfg.comment_kind = args.kind
    return cfg.validate(require_roots=args.command != "fetch-issues")


def _header(command: str, cfg: ScanConfig, inputs: dict[str, str], **extra) -> ReportHeader:
    policy = cfg.policy.as_dict()
    policy.update(extra)
    return ReportHeader(command, policy, inputs)


def _tree_digest(results) -> str:
    return digest_of(f"{r.path}:{r.digest}" for r in sorted(results, key=lambda r: r.path))


def _concepts(cfg: ScanConfig) -> tuple[Concept, ...]:
    return CORE_CONCEPTS + ((Concept.CONST_DECLARATION,) if cfg.policy.include_const else ())


# -- commands -----------------------------------------------------------------

def cmd_scan(cfg: ScanConfig) -> int:
    rows, summaries, inputs = [], {}, {}
    partial = False
    for root in cfg.roots:
        snap, results, warnings = analyze_tree(root, cfg.policy, cfg.extensions, cfg.exclusions, jobs=cfg.jobs)
        name = str(root)
        inputs[name] = _tree_digest(results)
        errors = {r.path: r.error for r in results if r.error}
        if errors:
            partial = True
            for path, err in sorted(errors.items()):
                print(f"skipped {name}/{path}: {err}", file=sys.stderr)
        if snap.loc.total_files:
            for concept, structure, tally, pct in concept_rows(snap):
                if concept == Concept.CONST_DECLARATION.value and not cfg.policy.include_const:
                    continue
                rows.append((name, concept, structure, tally.occurrences, tally.loc_lines, pct))
        summary = snap.to_dict()
        summary["skipped"] = [{"path": p, "error": e} for p, e in sorted(errors.items())]
        summary["warnings"] = sorted(set(warnings))
        summaries[name] = summary
    header = _header("scan", cfg, inputs)
    columns = ("repo", "concept", "structure", "occurrences", "loc_lines", "pct_loc")
    written = write_table(cfg.out_dir, "prevalence", header, columns, rows, cfg.formats)
    written.append(write_json(cfg.out_dir, "summary", header, {"repos": summaries}))
    _report(written)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_history(cfg: ScanConfig) -> int:
    rows, series_rows, inputs = [], [], {}
    partial = False
    for root in cfg.roots:
        repo = GitRepo(root)
        plan = plan_snapshots(repo)
        name = str(root)
        inputs[name] = plan.anchor.sha if plan.anchor else "empty"
        snaps = measure_snapshots(plan, cfg.policy, cfg.extensions, cfg.exclusions, cfg.jobs)
        partial |= any(s.skipped_files for s in snaps)
        series = concept_series(snaps)
        for i, s in enumerate(snaps):
            series_rows.append(
                (name, s.snapshot_id, s.timestamp, s.total_loc, *(series[c][i] for c in series))
            )
        summary = evolution(snaps)
        for concept, ev in summary.per_concept.items():
            label = concept.value if isinstance(concept, Concept) else concept
            rows.append((name, label, ev.gmean, ev.steps_used, ev.steps_discarded, ev.compound(cfg.anchor), cfg.anchor))
    header = _header("history", cfg, inputs, anchor=cfg.anchor)
    columns = ("repo", "concept", "gmean", "steps", "steps_discarded", "compound_at_anchor", "anchor")
    written = write_table(cfg.out_dir, "evolution", header, columns, rows, cfg.formats)
    labels = [c.value for c in CORE_CONCEPTS] + ["All"]
    written += write_table(
        cfg.out_dir, "snapshots", header, ("repo", "sha", "timestamp", "total_loc", *labels), series_rows, cfg.formats
    )
    _report(written)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_fetch_issues(cfg: ScanConfig, slug: str) -> int:
    from .github import GitHubClient

    token = os.environ.get(cfg.token_env)
    if not token:
        log.warning("%s is not set; requests are unauthenticated", cfg.token_env)
    client = GitHubClient(token, api_url=cfg.api_url)
    result = client.fetch(slug, cfg.limit)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, items in (("issues", result.all), ("issues-bug", result.bug), ("issues-other", result.other)):
        path = cfg.out_dir / f"{name}.ndjson"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            write_exports(items, fh)
        written.append(path)
    _report(written)
    return EXIT_OK


def cmd_bugs(cfg: ScanConfig, exports: Sequence[Path], yates: bool = False) -> int:
    if len(exports) != len(cfg.roots):
        raise ConfigError(f"got {len(exports)} --exports for {len(cfg.roots)} roots; pass one per root")
    level = cfg.alpha / cfg.hypotheses
    concepts = _concepts(cfg)
    rows, inputs = [], {}
    partial = False
    for root, export_path in zip(cfg.roots, exports):
        name = str(root)
        repo = GitRepo(root)
        inputs[name] = repo.resolve("HEAD") or "empty"
        inputs[str(export_path)] = file_digest(export_path)
        part = partition_commits(read_exports(export_path), cfg.limit)
        analyzer = SnapshotAnalyzer(repo, cfg.policy, cfg.extensions, cfg.exclusions)
        records, warnings = commit_records(analyzer, part, concepts)
        if warnings or part.warnings:
            partial = True
            for w in part.warnings + warnings:
                print(f"{name}: {w}", file=sys.stderr)
        results = analyze(build_tables(records, concepts), cfg.alpha, cfg.hypotheses, correction=yates)
        for concept in concepts:
            res = results[concept]
            t = res.table
            ratio = res.odds_ratio
            rows.append((
                name, concept.value, t.a, t.b, t.c, t.d, res.chi2, res.p_value,
                res.significant if res.test is not None else None,
                ratio, pct_less_likely(ratio) if ratio is not None else None,
                ";".join(res.flags),
            ))
    header = _header("bugs", cfg, inputs, alpha=cfg.alpha, hypotheses=cfg.hypotheses, limit=cfg.limit, yates=yates)
    columns = ("repo", "concept", "a", "b", "c", "d", "chi2", "p", f"significant@{level:g}",
               "odds_ratio", "pct_less_likely", "flags")
    _report(write_table(cfg.out_dir, "bugs", header, columns, rows, cfg.formats))
    return EXIT_PARTIAL if partial else EXIT_OK


def _record_row(repo: str, view: str, r: CommentRecord) -> tuple:
    return (repo, r.file, r.span.start_line, r.span.end_line, r.kind, view, r.size_chars, r.size_lines,
            r.has_jsdoc_tag, r.adjacent_fp, r.owner_node_span.start_line, r.owner_node_span.end_line)


def cmd_comments(cfg: ScanConfig, records_out: bool = False) -> int:
    rows, record_rows, inputs = [], [], {}
    partial = False
    for root in cfg.roots:
        name = str(root)
        _, results, _ = analyze_tree(
            root, cfg.policy, cfg.extensions, cfg.exclusions, with_comments=True, jobs=cfg.jobs
        )
        inputs[name] = _tree_digest(results)
        partial |= any(r.error for r in results)
        views: dict[Concept | None, list[CommentRecord]] = {None: []}
        views.update({c: [] for c in CORE_CONCEPTS})
        for r in results:
            for k, recs in (r.comments or {}).items():
                views[k].extend(recs)
        if records_out:
            for r in views[None]:
                record_rows.append(_record_row(name, "All", r))
        if not views[None]:
            continue
        for row in correlation_table(views, cfg.comment_kind):
            res = row.result
            rows.append((
                name, row.label, None if res is None else res.statistic, None if res is None else res.p_value,
                row.n_fp, row.n_nonfp, row.excluded_jsdoc, row.flag,
            ))
            if row.flag == "single-class":
                print(f"{name}: {row.label}: single-class data, no correlation", file=sys.stderr)
    header = _header("comments", cfg, inputs, kind=cfg.comment_kind or "pooled")
    columns = ("repo", "concept", "r", "p", "n_fp", "n_nonfp", "excluded_jsdoc", "flag")
    written = write_table(cfg.out_dir, "comments", header, columns, rows, cfg.formats)
    if records_out:
        written += write_table(
            cfg.out_dir, "comment-records", header,
            ("repo", "file", "start_line", "end_line", "kind", "view", "size_chars", "size_lines",
             "has_jsdoc_tag", "adjacent_fp", "owner_start_line", "owner_end_line"),
            record_rows, cfg.formats,
        )
    _report(written)
    return EXIT_PARTIAL if partial else EXIT_OK


def _report(paths) -> None:
    for p in paths:
        log.info("wrote %s", p)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "history":
            return cmd_history(cfg)
        if args.command == "fetch-issues":
            return cmd_fetch_issues(cfg, args.repo)
        if args.command == "bugs":
            return cmd_bugs(cfg, args.exports, args.yates)
        return cmd_comments(cfg, args.records)
    except (FpmineError, OSError) as exc:
        print(f"fpmine: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

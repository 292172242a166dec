import io
import json

import pytest

from fpmine.bugfix import (
    CommitRecord, ContingencyTable2x2, IssueExport, analyze, build_tables, classify_label, commit_records,
    partition_commits, pct_less_likely, read_exports, removals_between, render_less_likely, write_exports,
)
from fpmine.detectors import CORE_CONCEPTS, Concept
from fpmine.errors import ConfigError
from fpmine.gitrepo import GitRepo
from fpmine.history import SnapshotAnalyzer


@pytest.mark.parametrize(
    "label, expected",
    [
        ("bug", "bug"), ("Bug", "bug"), ("type: bug", "bug"), ("kind/defect", "bug"), ("Runtime Error", "bug"),
        ("failure", "bug"), ("fault", "bug"), ("exception", "bug"),
        ("bug: unconfirmed", "not-bug"), ("Unconfirmed Bug", "not-bug"), ("not a bug", "not-bug"),
        ("notice", "not-bug"), ("feature", "not-bug"), ("debugger", "not-bug"), ("errorless", "not-bug"),
        ("annotation bug", "bug"),
    ],
)
def test_classify_label(label, expected):
    assert classify_label(label) == expected


def test_classify_label_idempotent_and_case_insensitive():
    for lab in ("BUG", "bug", "Not Bug", "Defect"):
        assert classify_label(lab) == classify_label(lab.lower()) == classify_label(lab.upper())


def export(i, labels, sha, t=0, kind="issue"):
    return IssueExport(str(i), tuple(labels), sha, t, kind)


def test_partition_basic():
    bug, other = partition_commits([export(1, ["defect"], "X", 10)])
    assert bug == ["X"] and other == []


def test_partition_bug_plus_other_label_is_bug():
    part = partition_commits([export(1, ["bug", "wontfix"], "X")])
    assert part.bugfix == ["X"]


def test_partition_limit_keeps_most_recent():
    exports = [export(i, ["bug"], f"s{i}", t=i) for i in range(1500)]
    part = partition_commits(exports, limit=1000)
    assert len(part.bugfix) == 1000
    assert part.bugfix[0] == "s1499" and "s499" not in part.bugfix


def test_partition_conflict_goes_to_bugfix():
    part = partition_commits([export(1, ["bug"], "X", 5), export(2, ["docs"], "X", 6), export(3, [], "Y", 1)])
    assert part.bugfix == ["X"] and part.nonbugfix == ["Y"]
    assert part.conflicts == ["X"]


def test_partition_missing_sha_warns():
    part = partition_commits([export(1, ["bug"], None)])
    assert part.bugfix == [] and part.warnings


def test_ndjson_roundtrip_and_unknown_fields():
    buf = io.StringIO()
    write_exports([export(1, ["bug"], "abc", 1600000000, "pull-request")], buf)
    line = json.loads(buf.getvalue())
    line["extra"] = 1
    [e] = read_exports(io.StringIO(json.dumps(line) + "\n\n"))
    assert e == export(1, ["bug"], "abc", 1600000000, "pull-request")


def test_ndjson_malformed():
    with pytest.raises(ConfigError):
        read_exports(io.StringIO('{"id": 1}\n'))
    with pytest.raises(ConfigError):
        read_exports(io.StringIO("not json\n"))


def thunks(n: int) -> str:
    return "".join(f"const t{i} = () => {i};\n" for i in range(n))


def test_removals_between(git_builder):
    root = git_builder.commit({"a.js": thunks(3)}, "2021-01-01T00:00:00Z")
    child = git_builder.commit({"a.js": thunks(1)}, "2021-01-02T00:00:00Z")
    same = git_builder.commit({"b.txt": "x"}, "2021-01-03T00:00:00Z")
    grow = git_builder.commit({"a.js": thunks(5)}, "2021-01-04T00:00:00Z")
    repo = GitRepo(git_builder.path)
    assert removals_between(repo, root) is None
    parent, rem = removals_between(repo, child)
    assert parent == root and rem[Concept.LAZY_EVALUATION] == 2
    assert all(v == 0 for v in removals_between(repo, same)[1].values())
    assert all(v == 0 for v in removals_between(repo, grow)[1].values())


def test_merge_uses_first_parent(git_builder):
    git_builder.commit({"a.js": thunks(3)}, "2021-01-01T00:00:00Z")
    git_builder.git("checkout", "-q", "-b", "side")
    git_builder.commit({"a.js": thunks(0)}, "2021-01-02T00:00:00Z")
    git_builder.git("checkout", "-q", "main")
    main_tip = git_builder.commit({"b.js": "x();\n"}, "2021-01-03T00:00:00Z")
    git_builder.git("merge", "-q", "--no-ff", "-m", "m", "side", date="2021-01-04T00:00:00Z")
    merge = git_builder.git("rev-parse", "HEAD")
    parent, rem = removals_between(GitRepo(git_builder.path), merge)
    assert parent == main_tip and rem[Concept.LAZY_EVALUATION] == 3


def test_unparsable_changed_file_excludes_commit(git_builder):
    git_builder.commit({"a.js": thunks(2)}, "2021-01-01T00:00:00Z")
    broken = git_builder.commit({"a.js": "}{\n"}, "2021-01-02T00:00:00Z")
    an = SnapshotAnalyzer(GitRepo(git_builder.path))
    part = partition_commits([export(1, ["bug"], broken)])
    records, warnings = commit_records(an, part)
    assert records == [] and "fail to parse" in warnings[0]


def test_build_tables():
    recs = [
        CommitRecord("a", "p", True, {Concept.RECURSION: 1}),
        CommitRecord("b", "p", True, {Concept.RECURSION: 0}),
        CommitRecord("c", "p", False, {Concept.RECURSION: 2}),
        CommitRecord("d", "p", False, {}),
        CommitRecord("e", "p", False, {}),
    ]
    t = build_tables(recs)[Concept.RECURSION]
    assert (t.a, t.b, t.c, t.d) == (1, 1, 1, 2)
    assert t.a + t.b == 2 and t.c + t.d == 3


def test_analyze_symmetric():
    res = analyze({Concept.RECURSION: ContingencyTable2x2(10, 10, 10, 10)})[Concept.RECURSION]
    assert res.odds_ratio == 1.0 and res.p_value == pytest.approx(1.0) and not res.significant


def test_analyze_known_table():
    res = analyze({Concept.RECURSION: ContingencyTable2x2(20, 10, 10, 20)})[Concept.RECURSION]
    assert res.chi2 == pytest.approx(6.667, abs=1e-3)
    assert res.p_value == pytest.approx(0.00982, abs=1e-5)
    assert res.odds_ratio == 4.0
    assert res.significant  # 0.00982 < 0.01


def test_bonferroni_level():
    t = ContingencyTable2x2(20, 10, 10, 20)
    assert not analyze({Concept.RECURSION: t}, alpha=0.04, m=5)[Concept.RECURSION].significant


def test_analyze_degenerate():
    res = analyze({Concept.RECURSION: ContingencyTable2x2(0, 0, 3, 4)})[Concept.RECURSION]
    assert res.p_value is None and "degenerate" in res.flags and not res.significant


def test_analyze_zero_removal_in_bugfix():
    res = analyze({Concept.RECURSION: ContingencyTable2x2(0, 10, 5, 5)})[Concept.RECURSION]
    assert res.odds_ratio == 0.0 and "zero-cell" in res.flags


def test_row_swap_inverts_or_keeps_p():
    t = ContingencyTable2x2(12, 30, 25, 21)
    a = analyze({Concept.RECURSION: t})[Concept.RECURSION]
    b = analyze({Concept.RECURSION: t.swapped()})[Concept.RECURSION]
    assert b.odds_ratio == pytest.approx(1 / a.odds_ratio)
    assert b.p_value == pytest.approx(a.p_value)


def test_rendering():
    assert pct_less_likely(0.6223) == pytest.approx(37.77)
    assert render_less_likely(0.6223) == "37.77% less likely"
    assert render_less_likely(1.25) == "25.00% more likely"
    assert render_less_likely(1.0) == "equally likely"

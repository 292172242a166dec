import csv
import io
import json

import pytest

from test_detectors import LISTINGS
from test_github import TOKEN, issue, server  # noqa: F401  (fixture)
from fpmine.bugfix import IssueExport, write_exports
from fpmine.cli import main


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture
def listings(tmp_path):
    root = tmp_path / "listings"
    root.mkdir()
    for i, (src, _) in enumerate(LISTINGS, 1):
        (root / f"listing{i}.js").write_text(src)
    return root


def nonzero(rows):
    return {(r["structure"]): int(r["occurrences"]) for r in rows if r["structure"] != "total" and int(r["occurrences"])}


def test_scan_listings(listings, tmp_path):
    out = tmp_path / "out"
    assert main(["scan", "--root", str(listings), "--out", str(out)]) == 0
    rows = read_rows(out / "prevalence.csv")
    assert nonzero(rows) == {"spread-assignment": 1, "generator": 1, "thunk": 1, "promise": 1, "callback": 1}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == 1
    assert summary["repos"][str(listings)]["fp_total"]["occurrences"] == 5


def test_scan_empty_root(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["scan", "--root", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 0
    assert read_rows(tmp_path / "o" / "prevalence.csv") == []


def test_scan_partial_exit(listings, tmp_path, capsys):
    (listings / "broken.js").write_text("}{\n")
    assert main(["scan", "--root", str(listings), "--out", str(tmp_path / "o")]) == 2
    assert "broken.js" in capsys.readouterr().err
    assert read_rows(tmp_path / "o" / "prevalence.csv")


def test_scan_json_format_and_const(listings, tmp_path):
    out = tmp_path / "o"
    assert main(["scan", "--root", str(listings), "--out", str(out), "--format", "json", "--include-const"]) == 0
    doc = json.loads((out / "prevalence.json").read_text())
    assert doc["header"]["policy"]["include_const"] is True
    const = [r for r in doc["rows"] if r["structure"] == "const-decl"]
    assert const and const[0]["occurrences"] == 4
    assert not (out / "prevalence.csv").exists()


def test_fatal_exit(tmp_path):
    assert main(["scan", "--root", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == 1


def test_history_non_git_is_fatal(tmp_path):
    assert main(["history", "--root", str(tmp_path), "--out", str(tmp_path / "o")]) == 1


def test_history_command(git_builder, tmp_path):
    for month, n in zip((1, 2, 3), (1, 2, 4)):
        body = "".join(f"const t{i} = () => {i};\n" for i in range(n)) + "".join(f"x{i}();\n" for i in range(8 - n))
        git_builder.commit({"a.js": body}, f"2021-0{month}-15T10:00:00Z")
    out = tmp_path / "o"
    assert main(["history", "--root", str(git_builder.path), "--out", str(out), "--anchor", "2"]) == 0
    rows = {r["concept"]: r for r in read_rows(out / "evolution.csv")}
    assert float(rows["LazyEvaluation"]["gmean"]) == pytest.approx(2.0)
    assert float(rows["LazyEvaluation"]["compound_at_anchor"]) == pytest.approx(4.0)
    assert rows["Recursion"]["gmean"] == ""
    assert len(read_rows(out / "snapshots.csv")) == 3


def test_bugs_command(git_builder, tmp_path):
    thunks = lambda n: "".join(f"const t{i} = () => {i};\n" for i in range(n))  # noqa: E731
    git_builder.commit({"a.js": thunks(3)}, "2021-01-01T00:00:00Z")
    fix = git_builder.commit({"a.js": thunks(2)}, "2021-01-02T00:00:00Z")
    feat = git_builder.commit({"a.js": thunks(4)}, "2021-01-03T00:00:00Z")
    exports = tmp_path / "issues.ndjson"
    with open(exports, "w") as fh:
        write_exports([IssueExport("1", ("bug",), fix, 2), IssueExport("2", ("feature",), feat, 3)], fh)
    out = tmp_path / "o"
    assert main(["bugs", "--root", str(git_builder.path), "--exports", str(exports), "--out", str(out)]) == 0
    rows = {r["concept"]: r for r in read_rows(out / "bugs.csv")}
    lazy = rows["LazyEvaluation"]
    assert (lazy["a"], lazy["b"], lazy["c"], lazy["d"]) == ("1", "0", "0", "1")
    assert "significant@0.01" in lazy


def test_bugs_requires_matching_exports(git_builder, tmp_path):
    git_builder.commit({"a.js": "x;\n"}, "2021-01-01T00:00:00Z")
    e = tmp_path / "e.ndjson"
    e.write_text("")
    args = ["bugs", "--root", str(git_builder.path), "--root", str(git_builder.path), "--exports", str(e)]
    assert main(args + ["--out", str(tmp_path / "o")]) == 1


def test_comments_command(tmp_path):
    root = tmp_path / "c"
    root.mkdir()
    (root / "a.js").write_text(
        "// a fairly long comment about the thunk below\nconst f = () => 1;\n"
        "// short\nlet x = 1;\n// tiny\nlet y = 2;\n// another long comment on a thunk\nconst g = () => 2;\n"
        "/** @param z the thing */\nfunction h(z) { return z }\n"
    )
    out = tmp_path / "o"
    assert main(["comments", "--root", str(root), "--out", str(out), "--records"]) == 0
    rows = {r["concept"]: r for r in read_rows(out / "comments.csv")}
    assert set(rows) >= {"All", "LazyEvaluation", "Recursion"}
    assert rows["All"]["n_fp"] == "2" and rows["All"]["n_nonfp"] == "2" and rows["All"]["excluded_jsdoc"] == "1"
    assert float(rows["All"]["r"]) > 0.9
    assert rows["Recursion"]["flag"] == "single-class"
    assert len(read_rows(out / "comment-records.csv")) == 5


def test_comments_no_comments(tmp_path):
    root = tmp_path / "c"
    root.mkdir()
    (root / "a.js").write_text("x();\n")
    assert main(["comments", "--root", str(root), "--out", str(tmp_path / "o")]) == 0
    assert read_rows(tmp_path / "o" / "comments.csv") == []


def test_fetch_issues_command(server, tmp_path, monkeypatch):  # noqa: F811
    fake, url = server([issue(1, ["bug"], "a", 3), issue(2, ["docs"], "b", 2)])
    monkeypatch.setenv("FPMINE_TOKEN", TOKEN)
    out = tmp_path / "o"
    assert main(["fetch-issues", "--repo", "o/r", "--api-url", url, "--out", str(out)]) == 0
    assert len((out / "issues.ndjson").read_text().splitlines()) == 2
    assert len((out / "issues-bug.ndjson").read_text().splitlines()) == 1


def test_fetch_issues_auth_error(server, tmp_path, monkeypatch):  # noqa: F811
    fake, url = server([issue(1, ["bug"], "a")])
    monkeypatch.setenv("FPMINE_TOKEN", "nope")
    assert main(["fetch-issues", "--repo", "o/r", "--api-url", url, "--out", str(tmp_path / "o")]) == 1

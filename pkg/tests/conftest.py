import os
import subprocess
from pathlib import Path

import pytest

from fpmine.detectors import DetectorPolicy, detect_all
from fpmine.scopes import build_scopes
from fpmine.source import parse


def detect(src: str, path: str = "a.js", policy: DetectorPolicy | None = None):
    unit = parse(path, src.encode())
    return detect_all(unit, build_scopes(unit), policy or DetectorPolicy())


def structures(src: str, path: str = "a.js", policy: DetectorPolicy | None = None) -> list[str]:
    return [o.structure for o in detect(src, path, policy)]


class GitBuilder:
    """Scripted commits with fixed dates in a throwaway repository."""

    def __init__(self, path: Path):
        self.path = path
        path.mkdir(parents=True, exist_ok=True)
        self.git("init", "-q", "-b", "main")

    def git(self, *args: str, date: str | None = None) -> str:
        env = dict(os.environ)
        env.update(
            GIT_AUTHOR_NAME="t", GIT_AUTHOR_EMAIL="t@example.com",
            GIT_COMMITTER_NAME="t", GIT_COMMITTER_EMAIL="t@example.com",
            GIT_CONFIG_GLOBAL=os.devnull, GIT_CONFIG_SYSTEM=os.devnull,
        )
        if date:
            env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = date
        out = subprocess.run(["git", "-C", str(self.path), *args], env=env, check=True, capture_output=True)
        return out.stdout.decode().strip()

    def commit(self, files: dict[str, str | None], date: str, message: str = "c") -> str:
        for rel, text in files.items():
            p = self.path / rel
            if text is None:
                if p.exists():
                    self.git("rm", "-q", rel)
                continue
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
            self.git("add", rel)
        self.git("commit", "-q", "--allow-empty", "-m", message, date=date)
        return self.git("rev-parse", "HEAD")


@pytest.fixture
def git_builder(tmp_path):
    return GitBuilder(tmp_path / "repo")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        title, ok, detail = mod.RESULTS[number]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))

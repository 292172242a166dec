"""Read-only access to a git object store through plumbing commands.

Nothing here touches the work tree: trees are listed with ``ls-tree`` and
blobs are streamed through one ``cat-file --batch`` process per call.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConfigError, GitError


@dataclass(frozen=True)
class Commit:
    sha: str
    timestamp: int  # committer time, seconds since the epoch
    parents: tuple[str, ...] = ()


@dataclass(frozen=True)
class TreeEntry:
    path: str
    blob: str
    size: int


class GitRepo:
    def __init__(self, path: str | Path, git: str = "git"):
        self.path = Path(path)
        self.git = git
        try:
            out = self._run("rev-parse", "--git-dir")
        except (GitError, FileNotFoundError, NotADirectoryError) as exc:
            raise ConfigError(f"{path}: not a git repository") from exc
        if not out.strip():
            raise ConfigError(f"{path}: not a git repository")

    def _run(self, *args: str, input: bytes | None = None) -> str:
        proc = subprocess.run(
            [self.git, "-C", str(self.path), *args],
            input=input,
            capture_output=True,
        )
        if proc.returncode != 0:
            raise GitError(f"git {' '.join(args)}: {proc.stderr.decode(errors='replace').strip()}")
        return proc.stdout.decode("utf-8", errors="surrogateescape")

    def resolve(self, rev: str = "HEAD") -> str | None:
        """Full sha of ``rev``, or None if it does not name a commit."""
        try:
            return self._run("rev-parse", "--verify", "--quiet", f"{rev}^{{commit}}").strip() or None
        except GitError:
            return None

    def first_parent_log(self, rev: str = "HEAD") -> list[Commit]:
        """Commits on the first-parent chain from ``rev``, newest first."""
        if self.resolve(rev) is None:
            return []
        out = self._run("log", "--first-parent", "--format=%H %ct %P", rev, "--")
        commits = []
        for line in out.splitlines():
            sha, ts, *parents = line.split()
            commits.append(Commit(sha, int(ts), tuple(parents)))
        return commits

    def first_parent(self, sha: str) -> str | None:
        out = self._run("rev-list", "--parents", "-n", "1", sha).split()
        return out[1] if len(out) > 1 else None

    def commit_time(self, sha: str) -> int:
        return int(self._run("show", "-s", "--format=%ct", sha).strip())

    def list_files(self, sha: str) -> list[TreeEntry]:
        """Every blob in the tree of ``sha`` (recursively), sorted by path."""
        out = self._run("ls-tree", "-r", "-l", "-z", sha)
        entries = []
        for rec in out.split("\0"):
            if not rec:
                continue
            meta, path = rec.split("\t", 1)
            mode, kind, blob, size = meta.split()
            if kind != "blob" or mode == "120000":
                continue  # submodules and symlinks
            entries.append(TreeEntry(path, blob, int(size) if size != "-" else 0))
        entries.sort(key=lambda e: e.path)
        return entries

    def read_blobs(self, shas: Iterable[str]) -> Iterator[tuple[str, bytes]]:
        """Yield ``(sha, content)`` for each blob, in request order."""
        shas = list(shas)
        if not shas:
            return
        proc = subprocess.Popen(
            [self.git, "-C", str(self.path), "cat-file", "--batch"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
        assert proc.stdin is not None and proc.stdout is not None
        try:
            for sha in shas:
                proc.stdin.write(sha.encode() + b"\n")
                proc.stdin.flush()
                header = proc.stdout.readline().split()
                if len(header) < 3 or header[1] != b"blob":
                    raise GitError(f"cat-file: {sha} is not a blob")
                size = int(header[2])
                data = proc.stdout.read(size)
                proc.stdout.read(1)  # trailing newline
                yield sha, data
        finally:
            proc.stdin.close()
            proc.stdout.close()
            proc.wait()

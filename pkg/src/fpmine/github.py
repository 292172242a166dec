"""Fetch closed issues / pull requests and their closing commits from GitHub.

The output is IssueExport NDJSON, so analysis never needs the network. Only
the REST endpoints below are used:

- ``GET /repos/{slug}/issues?state=closed`` (issues and pull requests)
- ``GET /repos/{slug}/issues/{n}/events`` (the commit that closed an issue)
- ``GET /repos/{slug}/pulls/{n}`` (merge commit of a pull request)
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import requests

from .bugfix import DEFAULT_LIMIT, IssueExport, parse_time, is_bug_labelled
from .errors import FpmineError

log = logging.getLogger(__name__)

DEFAULT_API = "https://api.github.com"
DEFAULT_TOKEN_ENV = "FPMINE_TOKEN"


class AuthError(FpmineError):
    pass


class RateLimitError(FpmineError):
    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


@dataclass
class FetchResult:
    bug: list[IssueExport] = field(default_factory=list)
    other: list[IssueExport] = field(default_factory=list)

    @property
    def all(self) -> list[IssueExport]:
        return sorted(self.bug + self.other, key=lambda e: (-e.closed_at, e.id))


class GitHubClient:
    def __init__(
        self,
        token: str | None = None,
        api_url: str = DEFAULT_API,
        session: requests.Session | None = None,
        max_wait: float = 900.0,
        max_retries: int = 5,
        sleep: Callable[[float], None] = time.sleep,
        timeout: float = 30.0,
    ):
        self.api_url = api_url.rstrip("/")
        self.session = session or requests.Session()
        self.session.headers.update(
            {"Accept": "application/vnd.github+json", "User-Agent": "fpmine"}
        )
        if token:
            self.session.headers["Authorization"] = f"Bearer {token}"
        self.max_wait = max_wait
        self.max_retries = max_retries
        self.sleep = sleep
        self.timeout = timeout

    @classmethod
    def from_env(cls, env_var: str = DEFAULT_TOKEN_ENV, **kw) -> "GitHubClient":
        return cls(os.environ.get(env_var), **kw)

    def _wait_time(self, resp: requests.Response) -> float | None:
        """Seconds to wait if ``resp`` is a rate-limit response, else None."""
        if resp.status_code not in (403, 429):
            return None
        retry_after = resp.headers.get("Retry-After")
        if retry_after is not None:
            try:
                return max(0.0, float(retry_after))
            except ValueError:
                return 60.0
        if resp.headers.get("X-RateLimit-Remaining") == "0":
            reset = resp.headers.get("X-RateLimit-Reset")
            if reset is not None:
                return max(0.0, float(reset) - time.time())
            return 60.0
        return None if resp.status_code == 403 else 60.0

    def get(self, url: str, params: dict | None = None) -> requests.Response:
        if not url.startswith("http"):
            url = self.api_url + url
        for attempt in range(self.max_retries + 1):
            resp = self.session.get(url, params=params, timeout=self.timeout)
            wait = self._wait_time(resp)
            if wait is not None:
                if wait > self.max_wait or attempt == self.max_retries:
                    raise RateLimitError(f"rate limited on {url}", retry_after=wait)
                log.warning("rate limited; sleeping %.0f s", wait)
                self.sleep(wait)
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"HTTP {resp.status_code} for {url}: check the API token")
            if resp.status_code >= 400:
                raise FpmineError(f"HTTP {resp.status_code} for {url}")
            return resp
        raise RateLimitError(f"rate limited on {url}")  # pragma: no cover

    def paginate(self, path: str, params: dict | None = None) -> Iterator[dict]:
        params = dict(params or {})
        params.setdefault("per_page", 100)
        url: str | None = path
        while url:
            resp = self.get(url, params)
            yield from resp.json()
            url = resp.links.get("next", {}).get("url")
            params = None  # the next link carries the query

    def closing_commit(self, slug: str, item: dict) -> str | None:
        number = item["number"]
        if "pull_request" in item:
            pr = self.get(f"/repos/{slug}/pulls/{number}").json()
            return pr.get("merge_commit_sha") if pr.get("merged_at") else None
        sha = None
        for ev in self.paginate(f"/repos/{slug}/issues/{number}/events"):
            if ev.get("event") == "closed" and ev.get("commit_id"):
                sha = ev["commit_id"]  # keep the last one
        return sha

    def fetch(self, slug: str, limit: int = DEFAULT_LIMIT) -> FetchResult:
        """Most recently updated closed items, up to ``limit`` with a commit per class."""
        out = FetchResult()
        with_sha = {True: 0, False: 0}
        params = {"state": "closed", "sort": "updated", "direction": "desc"}
        for item in self.paginate(f"/repos/{slug}/issues", params):
            if not item.get("closed_at"):
                continue
            labels = tuple(
                lab["name"] if isinstance(lab, dict) else str(lab) for lab in item.get("labels", [])
            )
            bug = is_bug_labelled(labels)
            if with_sha[bug] >= limit:
                if with_sha[not bug] >= limit:
                    break
                continue
            sha = self.closing_commit(slug, item)
            export = IssueExport(
                str(item["number"]),
                labels,
                sha,
                parse_time(item["closed_at"]),
                "pull-request" if "pull_request" in item else "issue",
            )
            (out.bug if bug else out.other).append(export)
            if sha:
                with_sha[bug] += 1
        out.bug.sort(key=lambda e: (-e.closed_at, e.id))
        out.other.sort(key=lambda e: (-e.closed_at, e.id))
        return out

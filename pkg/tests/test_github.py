import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from fpmine.github import AuthError, GitHubClient, RateLimitError

TOKEN = "secret-token"


class FakeGitHub:
    """Serves issues, events and pulls for repo ``o/r``."""

    def __init__(self, issues, per_page=2):
        self.issues = issues  # list of dicts with number, labels, closed_at, sha, pr?
        self.per_page = per_page
        self.rate_limit_once = False
        self.requests = []

    def issue_json(self, it):
        d = {"number": it["number"], "closed_at": it["closed_at"], "labels": [{"name": n} for n in it["labels"]]}
        if it.get("pr"):
            d["pull_request"] = {"url": "x"}
        return d

    def handle(self, h: BaseHTTPRequestHandler):
        self.requests.append(h.path)
        if h.headers.get("Authorization") != f"Bearer {TOKEN}":
            return h.send_json(401, {"message": "Bad credentials"})
        if self.rate_limit_once:
            self.rate_limit_once = False
            return h.send_json(403, {"message": "rate"}, {"Retry-After": "0", "X-RateLimit-Remaining": "0"})
        url = urlparse(h.path)
        q = parse_qs(url.query)
        parts = url.path.strip("/").split("/")
        if parts[:3] == ["repos", "o", "r"] and parts[3:] == ["issues"]:
            page = int(q.get("page", ["1"])[0])
            lo = (page - 1) * self.per_page
            chunk = self.issues[lo: lo + self.per_page]
            headers = {}
            if lo + self.per_page < len(self.issues):
                base = f"http://{h.headers['Host']}/repos/o/r/issues"
                headers["Link"] = f'<{base}?state=closed&per_page={self.per_page}&page={page + 1}>; rel="next"'
            return h.send_json(200, [self.issue_json(i) for i in chunk], headers)
        if parts[3:4] == ["issues"] and parts[5:] == ["events"]:
            it = next(i for i in self.issues if i["number"] == int(parts[4]))
            events = [{"event": "labeled"}]
            if it.get("sha"):
                events.append({"event": "closed", "commit_id": it["sha"]})
            return h.send_json(200, events)
        if parts[3:4] == ["pulls"]:
            it = next(i for i in self.issues if i["number"] == int(parts[4]))
            return h.send_json(200, {"merged_at": "2021-01-01T00:00:00Z", "merge_commit_sha": it["sha"]})
        return h.send_json(404, {"message": "Not Found"})


@pytest.fixture
def server():
    holder = {}

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *a):
            pass

        def send_json(self, code, body, headers=None):
            data = json.dumps(body).encode()
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            for k, v in (headers or {}).items():
                self.send_header(k, v)
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            holder["fake"].handle(self)

    httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()

    def start(issues, per_page=2):
        holder["fake"] = FakeGitHub(issues, per_page)
        return holder["fake"], f"http://127.0.0.1:{httpd.server_port}"

    yield start
    httpd.shutdown()


def issue(n, labels, sha, day=1, pr=False):
    return {"number": n, "labels": labels, "sha": sha, "closed_at": f"2021-03-{day:02d}T00:00:00Z", "pr": pr}


def test_three_bug_issues(server):
    fake, url = server([issue(1, ["bug"], "a", 3), issue(2, ["defect"], "b", 2), issue(3, ["error"], "c", 1)])
    res = GitHubClient(TOKEN, api_url=url).fetch("o/r")
    assert [e.closing_commit_sha for e in res.bug] == ["a", "b", "c"]
    assert res.other == []


def test_no_matching_labels(server):
    fake, url = server([issue(1, ["docs"], "a"), issue(2, [], "b")])
    res = GitHubClient(TOKEN, api_url=url).fetch("o/r")
    assert res.bug == [] and len(res.other) == 2


def test_pull_request_merge_commit(server):
    fake, url = server([issue(7, ["bug"], "m", pr=True)])
    [e] = GitHubClient(TOKEN, api_url=url).fetch("o/r").bug
    assert e.kind == "pull-request" and e.closing_commit_sha == "m"


def test_limit_per_class(server):
    issues = [issue(i, ["bug"], f"s{i}", day=1) for i in range(1, 16)]
    fake, url = server(issues, per_page=4)
    res = GitHubClient(TOKEN, api_url=url).fetch("o/r", limit=10)
    assert len(res.bug) == 10


def test_pagination_followed(server):
    fake, url = server([issue(i, ["x"], f"s{i}") for i in range(1, 6)], per_page=2)
    res = GitHubClient(TOKEN, api_url=url).fetch("o/r")
    assert len(res.other) == 5
    assert sum("/repos/o/r/issues?" in p for p in fake.requests) == 3


def test_auth_failure(server):
    fake, url = server([issue(1, ["bug"], "a")])
    with pytest.raises(AuthError):
        GitHubClient("wrong", api_url=url).fetch("o/r")


def test_rate_limit_retry_after_honoured(server):
    fake, url = server([issue(1, ["bug"], "a")])
    fake.rate_limit_once = True
    slept = []
    res = GitHubClient(TOKEN, api_url=url, sleep=slept.append).fetch("o/r")
    assert slept == [0.0] and len(res.bug) == 1


def test_rate_limit_too_long_raises(server):
    fake, url = server([issue(1, ["bug"], "a")])
    fake.rate_limit_once = True
    with pytest.raises(RateLimitError):
        GitHubClient(TOKEN, api_url=url, max_wait=-1, sleep=lambda s: None).fetch("o/r")

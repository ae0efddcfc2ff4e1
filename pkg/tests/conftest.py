"""Shared fixtures: the oracle repository and a local static fixture forge.

The fixture forge is one HTTP server speaking just enough of a Gitea-style
surface for the whole pipeline: a fingerprintable front page, a paginated
repository listing API, dumb-HTTP git repositories, a hash-search endpoint
mimicking a commit-search API, and a directory of comparison-corpus clones.
"""

from __future__ import annotations

import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from repo_fixtures import (
    bare_clone,
    bare_empty,
    build_delta_repo,
    build_gamma_repo,
    build_oracle_repo,
)

FRONT_PAGE = """<!DOCTYPE html>
<html>
<head>
<meta name="keywords" content="go,git,self-hosted,gitea">
<title>fixture forge</title>
</head>
<body>
<footer>Powered by Gitea Version: 1.17.3</footer>
</body>
</html>
"""


class ForgeFixture:
    def __init__(self, root: Path, host: str, port: int):
        self.root = root
        self.host = host
        self.port = port
        self.known_hashes: set[str] = set()

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"


class _ForgeHandler(BaseHTTPRequestHandler):
    fixture: ForgeFixture

    def log_message(self, *args):  # keep test output clean
        pass

    def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        parsed = urlparse(self.path)
        path = unquote(parsed.path)
        query = parse_qs(parsed.query)
        fixture = self.fixture

        if path == "/":
            self._send(200, FRONT_PAGE.encode(), "text/html")
            return
        if path == "/api/v1/repos/search":
            page = int(query.get("page", ["1"])[0])
            if page == 1:
                data = [
                    {
                        "full_name": "team/alpha",
                        "clone_url": f"{fixture.base_url}/repos/team/alpha.git",
                    },
                    {
                        "full_name": "team/beta",
                        "clone_url": f"{fixture.base_url}/repos/team/beta.git",
                    },
                    {
                        "full_name": "team/hollow",
                        "clone_url": f"{fixture.base_url}/repos/team/hollow.git",
                    },
                ]
            else:
                data = []
            self._send(200, json.dumps({"ok": True, "data": data}).encode())
            return
        if path == "/ghapi/search/commits":
            q = query.get("q", [""])[0]
            commit_hash = q.split("hash:", 1)[-1]
            found = commit_hash in fixture.known_hashes
            self._send(200, json.dumps({"total_count": 1 if found else 0}).encode())
            return
        # Static file serving for git's dumb HTTP protocol.
        candidate = (fixture.root / path.lstrip("/")).resolve()
        if candidate.is_file() and str(candidate).startswith(str(fixture.root)):
            self._send(200, candidate.read_bytes(), "application/octet-stream")
            return
        self._send(404, b"not found", "text/plain")


@pytest.fixture(scope="session")
def oracle_repo(tmp_path_factory) -> Path:
    return build_oracle_repo(tmp_path_factory.mktemp("oracle") / "repo")


@pytest.fixture()
def e2e_config(fixture_forge, tmp_path) -> dict:
    """Pipeline config wired to the fixture forge and the static data files."""
    from forgemine.pipeline import load_config

    data = Path(__file__).parent / "data"
    hosts_file = tmp_path / "hosts.txt"
    hosts_file.write_text(f"127.0.0.1:{fixture_forge.port}\n")
    return load_config(
        overrides={
            "seed": 42,
            "rate": {"min_interval_s": 0.0},
            "scan": {"hosts_file": str(hosts_file)},
            "clone": {"timeout_mins": 2, "retries": 1, "concurrency": 2},
            "comparison": {
                "events_file": str(data / "events.jsonl"),
                "oversample_factor": 1.5,
                "clone_base_url": f"{fixture_forge.base_url}/clones",
            },
            "dedup": {
                "github": {
                    "enabled": True,
                    "base_url": f"{fixture_forge.base_url}/ghapi",
                    "token_env": "GITHUB_TOKEN",
                }
            },
            "label": {
                "university_domains_file": str(data / "university_domains.txt"),
                "geo_file": str(data / "geo.json"),
            },
            "stats": {
                "include_language": False,
                "features": ["commits"],
                "rare_language_threshold": 1,
            },
            "report": {"population_file": str(data / "population.json")},
        }
    )


@pytest.fixture(scope="session")
def fixture_forge(tmp_path_factory):
    """Start the static fixture forge; yields a ForgeFixture."""
    root = tmp_path_factory.mktemp("forge_root")
    work = tmp_path_factory.mktemp("forge_work")

    alpha_src = build_oracle_repo(work / "alpha")
    bare_clone(alpha_src, root / "repos" / "team" / "alpha.git")
    bare_clone(alpha_src, root / "repos" / "team" / "beta.git")  # exact mirror
    bare_empty(root / "repos" / "team" / "hollow.git")
    gamma_src = build_gamma_repo(work / "gamma")
    bare_clone(gamma_src, root / "clones" / "org1" / "gamma.git")
    delta_src = build_delta_repo(work / "delta")
    bare_clone(delta_src, root / "clones" / "org1" / "delta.git")

    server = ThreadingHTTPServer(("127.0.0.1", 0), _ForgeHandler)
    fixture = ForgeFixture(root=root, host="127.0.0.1", port=server.server_address[1])
    _ForgeHandler.fixture = fixture
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield fixture
    server.shutdown()
    thread.join(timeout=5)

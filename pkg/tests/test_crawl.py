"""Repository enumeration, status taxonomy, rate limiting, corpus crawl."""

from __future__ import annotations

import json
import time

import pytest

from forgemine.crawl import (
    CrawlState,
    RateLimitConfig,
    RepoRef,
    crawl_corpus,
    enumerate_repos,
)
from forgemine.errors import TransportError
from forgemine.fetch import FetchResult
from forgemine.fingerprint import ForgeKind, HostRecord
from forgemine.store import CorpusStore

FAST = RateLimitConfig(min_interval_s=0.0, per_page=50, page_cap=100)


class RecordingFetcher:
    """Canned responses keyed by URL; records request order and times."""

    def __init__(self, responses: dict):
        self.responses = responses
        self.requests: list[tuple[float, str]] = []

    def fetch(self, url: str, timeout: float = 30.0) -> FetchResult:
        self.requests.append((time.monotonic(), url))
        result = self.responses.get(url)
        if result is None:
            raise TransportError(f"no route to {url}")
        if isinstance(result, Exception):
            raise result
        return result


def gitea_host(address="forge.example", port=3000) -> HostRecord:
    return HostRecord(address=address, port=port, scheme="http", kind=ForgeKind.GITEA)


def listing_url(host: HostRecord, page: int, per_page: int = 50) -> str:
    return f"{host.base_url}/api/v1/repos/search?limit={per_page}&page={page}"


def page_body(entries: list[dict]) -> FetchResult:
    return FetchResult(url="u", status=200, body=json.dumps({"ok": True, "data": entries}).encode())


def make_entries(start: int, count: int) -> list[dict]:
    return [{"full_name": f"owner{i}/repo{i}"} for i in range(start, start + count)]


class TestEnumerateRepos:
    def test_three_pages_of_fifty(self):
        host = gitea_host()
        fetcher = RecordingFetcher(
            {
                listing_url(host, 1): page_body(make_entries(0, 50)),
                listing_url(host, 2): page_body(make_entries(50, 50)),
                listing_url(host, 3): page_body(make_entries(100, 50)),
                listing_url(host, 4): page_body([]),
            }
        )
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert len(refs) == 150
        assert status.state is CrawlState.LISTED
        assert status.repo_count == 150

    def test_empty_listing_no_public_repos(self):
        host = gitea_host()
        fetcher = RecordingFetcher({listing_url(host, 1): page_body([])})
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert refs == []
        assert status.state is CrawlState.NO_PUBLIC_REPOS

    def test_http_401_login_required(self):
        host = gitea_host()
        fetcher = RecordingFetcher(
            {listing_url(host, 1): FetchResult(url="u", status=401, body=b"")}
        )
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert refs == []
        assert status.state is CrawlState.LOGIN_REQUIRED

    def test_transport_failure_unreachable(self):
        refs, status = enumerate_repos(gitea_host(), RecordingFetcher({}), FAST)
        assert status.state is CrawlState.UNREACHABLE

    def test_malformed_page_annotated_not_fatal(self):
        host = gitea_host()
        fetcher = RecordingFetcher(
            {
                listing_url(host, 1): page_body(make_entries(0, 50)),
                listing_url(host, 2): FetchResult(url="u", status=200, body=b"<<<not json"),
            }
        )
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert len(refs) == 50
        assert status.state is CrawlState.LISTED
        assert any("parse failure" in a for a in status.annotations)

    def test_all_pages_malformed_is_no_public_repos(self):
        host = gitea_host()
        fetcher = RecordingFetcher(
            {listing_url(host, 1): FetchResult(url="u", status=200, body=b"}{")}
        )
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert status.state is CrawlState.NO_PUBLIC_REPOS
        assert status.annotations

    def test_gitlab_endpoint_and_parsing(self):
        host = HostRecord(address="gl.example", port=443, scheme="https", kind=ForgeKind.GITLAB_CE)
        url = (
            f"{host.base_url}/api/v4/projects?visibility=public&simple=true&per_page=50&page=1"
        )
        body = json.dumps(
            [{"path_with_namespace": "grp/proj", "http_url_to_repo": "https://gl.example/grp/proj.git"}]
        ).encode()
        fetcher = RecordingFetcher({url: FetchResult(url="u", status=200, body=body)})
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert status.state is CrawlState.LISTED
        assert refs[0].owner == "grp" and refs[0].name == "proj"

    def test_unknown_kind_rejected(self):
        host = HostRecord(address="x.example", port=80, scheme="http")
        with pytest.raises(ValueError):
            enumerate_repos(host, RecordingFetcher({}), FAST)

    def test_per_host_request_spacing(self):
        host = gitea_host()
        limits = RateLimitConfig(min_interval_s=0.05, per_page=50, page_cap=10)
        fetcher = RecordingFetcher(
            {
                listing_url(host, 1): page_body(make_entries(0, 50)),
                listing_url(host, 2): page_body(make_entries(50, 50)),
                listing_url(host, 3): page_body([]),
            }
        )
        enumerate_repos(host, fetcher, limits)
        stamps = [t for t, _ in fetcher.requests]
        assert len(stamps) == 3
        gaps = [b - a for a, b in zip(stamps, stamps[1:])]
        assert all(gap >= 0.045 for gap in gaps)  # small scheduling slack

    def test_pagination_cap_annotated(self):
        host = gitea_host()
        limits = RateLimitConfig(min_interval_s=0.0, per_page=1, page_cap=2)
        fetcher = RecordingFetcher(
            {
                listing_url(host, 1, per_page=1): page_body(make_entries(0, 1)),
                listing_url(host, 2, per_page=1): page_body(make_entries(1, 1)),
                listing_url(host, 3, per_page=1): page_body(make_entries(2, 1)),
            }
        )
        refs, status = enumerate_repos(host, fetcher, limits)
        assert len(refs) == 2
        assert any("cap" in a for a in status.annotations)

    def test_cross_domain_redirect_annotated(self):
        host = gitea_host()
        fetcher = RecordingFetcher(
            {
                listing_url(host, 1): FetchResult(
                    url=listing_url(host, 1),
                    status=302,
                    headers={"location": "https://github.com/elsewhere"},
                )
            }
        )
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert status.state is CrawlState.UNREACHABLE
        assert any("cross-domain" in a for a in status.annotations)

    def test_html_fallback_when_api_disabled(self):
        host = gitea_host()
        explore = (
            '<html><body><a class="name" href="/ada/tooling">tooling</a>'
            '<a href="/explore/users">users</a>'
            '<a class="name" href="/ben/paper-code">paper-code</a></body></html>'
        )
        fetcher = RecordingFetcher(
            {
                listing_url(host, 1): FetchResult(url="u", status=404, body=b""),
                f"{host.base_url}/explore/repos?page=1": FetchResult(
                    url="u", status=200, body=explore.encode()
                ),
                f"{host.base_url}/explore/repos?page=2": FetchResult(
                    url="u", status=200, body=explore.encode()  # repeats: stop
                ),
            }
        )
        refs, status = enumerate_repos(host, fetcher, FAST)
        assert status.state is CrawlState.LISTED
        assert {(r.owner, r.name) for r in refs} == {("ada", "tooling"), ("ben", "paper-code")}
        assert any("html-fallback" in a for a in status.annotations)

    def test_status_taxonomy_is_total(self):
        # Every canned host ends in exactly one state.
        host = gitea_host()
        cases = [
            RecordingFetcher({listing_url(host, 1): page_body(make_entries(0, 1))}),
            RecordingFetcher({listing_url(host, 1): page_body([])}),
            RecordingFetcher({listing_url(host, 1): FetchResult(url="u", status=403, body=b"")}),
            RecordingFetcher({}),
        ]
        states = [enumerate_repos(host, f, FAST)[1].state for f in cases]
        assert states == [
            CrawlState.LISTED,
            CrawlState.NO_PUBLIC_REPOS,
            CrawlState.LOGIN_REQUIRED,
            CrawlState.UNREACHABLE,
        ]


class TestCrawlCorpus:
    def _hosts(self):
        return [
            gitea_host("listed.example"),
            gitea_host("empty.example"),
            gitea_host("down.example"),
        ]

    def _fetcher(self):
        listed = gitea_host("listed.example")
        empty = gitea_host("empty.example")
        return RecordingFetcher(
            {
                listing_url(listed, 1): page_body(make_entries(0, 2)),
                listing_url(empty, 1): page_body([]),
            }
        )

    def test_summary_counts(self, tmp_path):
        store = CorpusStore(tmp_path / "store")
        summary = crawl_corpus(self._hosts(), self._fetcher(), FAST, store)
        assert summary == {"listed": 1, "no-public-repos": 1, "unreachable": 1}

    def test_rerun_is_idempotent(self, tmp_path):
        store = CorpusStore(tmp_path / "store")
        crawl_corpus(self._hosts(), self._fetcher(), FAST, store)
        fetcher = self._fetcher()
        summary = crawl_corpus(self._hosts(), fetcher, FAST, store)
        assert fetcher.requests == []  # zero new fetches
        assert summary == {"listed": 1, "no-public-repos": 1, "unreachable": 1}

    def test_forced_rerun_refreshes(self, tmp_path):
        store = CorpusStore(tmp_path / "store")
        crawl_corpus(self._hosts(), self._fetcher(), FAST, store)
        # The formerly empty host now lists a repository.
        listed = gitea_host("listed.example")
        empty = gitea_host("empty.example")
        changed = RecordingFetcher(
            {
                listing_url(listed, 1): page_body(make_entries(0, 2)),
                listing_url(empty, 1): page_body(make_entries(9, 1)),
            }
        )
        summary = crawl_corpus(self._hosts(), changed, FAST, store, force=True)
        assert changed.requests  # really refetched
        assert summary == {"listed": 2, "unreachable": 1}

    def test_no_duplicate_keys_in_refs(self, tmp_path):
        store = CorpusStore(tmp_path / "store")
        crawl_corpus(self._hosts(), self._fetcher(), FAST, store)
        refs = [RepoRef.from_json(o) for o in store.read_jsonl("crawl_repos")]
        keys = [(r.host_key, r.owner, r.name) for r in refs]
        assert len(keys) == len(set(keys))

"""Enumerate the publicly listed repositories on a fingerprinted forge host.

Each forge's JSON listing API is preferred (it is stable and paginated); a
minimal HTML fallback covers hosts that disabled the API. Every crawled host
ends in exactly one status: Listed(n), Unreachable, NoPublicRepos, or
LoginRequired.
"""

from __future__ import annotations

import json
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Optional

from .errors import TransportError
from .fetch import Fetcher, fetch_with_redirects
from .fingerprint import ForgeKind, HostRecord


class CrawlState(str, Enum):
    LISTED = "listed"
    UNREACHABLE = "unreachable"
    NO_PUBLIC_REPOS = "no-public-repos"
    LOGIN_REQUIRED = "login-required"


@dataclass
class HostCrawlStatus:
    host_key: tuple[str, int, str]
    state: CrawlState
    repo_count: int = 0
    annotations: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.state is CrawlState.LISTED and self.repo_count < 1:
            raise ValueError("Listed status requires at least one repository")

    def to_json(self) -> dict:
        return {
            "host_key": list(self.host_key),
            "state": self.state.value,
            "repo_count": self.repo_count,
            "annotations": self.annotations,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HostCrawlStatus":
        return cls(
            host_key=tuple(obj["host_key"]),
            state=CrawlState(obj["state"]),
            repo_count=obj.get("repo_count", 0),
            annotations=list(obj.get("annotations", [])),
        )


@dataclass
class RepoRef:
    host_key: tuple[str, int, str]
    owner: str
    name: str
    clone_url: str
    discovered_at: Optional[datetime] = None

    @property
    def repo_id(self) -> str:
        address, port, _ = self.host_key
        return f"{address}_{port}/{self.owner}/{self.name}"

    def to_json(self) -> dict:
        return {
            "host_key": list(self.host_key),
            "owner": self.owner,
            "name": self.name,
            "clone_url": self.clone_url,
            "discovered_at": self.discovered_at.isoformat() if self.discovered_at else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RepoRef":
        discovered = obj.get("discovered_at")
        return cls(
            host_key=tuple(obj["host_key"]),
            owner=obj["owner"],
            name=obj["name"],
            clone_url=obj["clone_url"],
            discovered_at=datetime.fromisoformat(discovered) if discovered else None,
        )


@dataclass
class RateLimitConfig:
    min_interval_s: float = 1.0
    concurrency: int = 32
    page_cap: int = 10_000
    per_page: int = 50
    timeout_s: float = 30.0


class _HostPacer:
    """Keeps successive requests to one host at least min_interval apart."""

    def __init__(self, min_interval_s: float):
        self.min_interval_s = min_interval_s
        self._last: Optional[float] = None

    def wait(self) -> None:
        if self._last is not None:
            remaining = self.min_interval_s - (time.monotonic() - self._last)
            if remaining > 0:
                time.sleep(remaining)
        self._last = time.monotonic()


def _listing_url(host: HostRecord, page: int, per_page: int) -> str:
    if host.kind in (ForgeKind.GITEA, ForgeKind.GOGS):
        return f"{host.base_url}/api/v1/repos/search?limit={per_page}&page={page}"
    if host.kind is ForgeKind.GITLAB_CE:
        return (
            f"{host.base_url}/api/v4/projects?visibility=public&simple=true"
            f"&per_page={per_page}&page={page}"
        )
    raise ValueError(f"host kind {host.kind} has no listing endpoint")


def _parse_listing(host: HostRecord, body: str) -> list[tuple[str, str, str]]:
    """Parse one listing page into (owner, name, clone_url) triples."""
    payload = json.loads(body)
    triples = []
    if host.kind in (ForgeKind.GITEA, ForgeKind.GOGS):
        entries = payload.get("data", []) if isinstance(payload, dict) else []
        for entry in entries:
            full_name = entry.get("full_name") or ""
            owner, _, name = full_name.partition("/")
            if not owner or not name:
                raise ValueError(f"bad repository entry: {entry!r}")
            clone_url = entry.get("clone_url") or f"{host.base_url}/{owner}/{name}.git"
            triples.append((owner, name, clone_url))
    else:
        if not isinstance(payload, list):
            raise ValueError("project listing is not a JSON array")
        for entry in payload:
            full_name = entry.get("path_with_namespace") or ""
            owner, _, name = full_name.rpartition("/")
            if not owner or not name:
                raise ValueError(f"bad project entry: {entry!r}")
            clone_url = entry.get("http_url_to_repo") or f"{host.base_url}/{full_name}.git"
            triples.append((owner, name, clone_url))
    return triples


_HTML_LISTING_PATHS = {
    ForgeKind.GITEA: "/explore/repos",
    ForgeKind.GOGS: "/explore/repos",
    ForgeKind.GITLAB_CE: "/explore/projects",
}
_HTML_REPO_LINK = re.compile(r'href="/([\w.~-]+)/([\w.~-]+?)(?:\.git)?"')
_HTML_NON_REPO_OWNERS = {
    "explore", "user", "users", "admin", "api", "assets", "help",
    "groups", "dashboard", "public", "search", "-",
}


def _html_fallback(
    host: HostRecord, fetcher: Fetcher, limits: RateLimitConfig, pacer: _HostPacer
) -> tuple[list[tuple[str, str, str]], list[str]]:
    """Scrape the public explore page when the listing API is disabled."""
    triples: dict[tuple[str, str], tuple[str, str, str]] = {}
    annotations = ["html-fallback: listing API unavailable"]
    base_path = _HTML_LISTING_PATHS[host.kind]
    for page in range(1, limits.page_cap + 1):
        pacer.wait()
        url = f"{host.base_url}{base_path}?page={page}"
        result, note = fetch_with_redirects(fetcher, url, timeout=limits.timeout_s)
        if note:
            annotations.append(note)
        if result.status != 200:
            break
        found_new = False
        for owner, name in _HTML_REPO_LINK.findall(result.text):
            if owner in _HTML_NON_REPO_OWNERS or name in _HTML_NON_REPO_OWNERS:
                continue
            key = (owner, name)
            if key not in triples:
                triples[key] = (owner, name, f"{host.base_url}/{owner}/{name}.git")
                found_new = True
        if not found_new:
            break
    return list(triples.values()), annotations


def enumerate_repos(
    host: HostRecord,
    fetcher: Fetcher,
    limits: RateLimitConfig | None = None,
) -> tuple[list[RepoRef], HostCrawlStatus]:
    """List every publicly visible repository on one forge host.

    Pagination runs to exhaustion (or the page cap). Transport failure maps
    to Unreachable, an authentication challenge on the listing endpoint to
    LoginRequired, and an empty successful listing to NoPublicRepos.
    Malformed pages are annotated rather than fatal.
    """
    if host.kind not in (ForgeKind.GITEA, ForgeKind.GOGS, ForgeKind.GITLAB_CE):
        raise ValueError(f"cannot crawl host of kind {host.kind}")
    limits = limits or RateLimitConfig()
    pacer = _HostPacer(limits.min_interval_s)
    annotations: list[str] = []
    triples: dict[tuple[str, str], tuple[str, str, str]] = {}

    def finish(state: CrawlState) -> tuple[list[RepoRef], HostCrawlStatus]:
        refs = [
            RepoRef(
                host_key=host.key,
                owner=owner,
                name=name,
                clone_url=clone_url,
                discovered_at=datetime.now(timezone.utc),
            )
            for owner, name, clone_url in triples.values()
        ]
        status = HostCrawlStatus(
            host_key=host.key,
            state=state,
            repo_count=len(refs),
            annotations=annotations,
        )
        return refs, status

    page = 1
    api_missing = False
    while page <= limits.page_cap:
        pacer.wait()
        url = _listing_url(host, page, limits.per_page)
        try:
            result, note = fetch_with_redirects(fetcher, url, timeout=limits.timeout_s)
        except TransportError as exc:
            annotations.append(f"transport failure: {exc}")
            return finish(CrawlState.UNREACHABLE)
        if note:
            annotations.append(note)
        if result.is_redirect:
            # Cross-domain or over-deep redirect on the listing endpoint.
            return finish(CrawlState.UNREACHABLE)
        if result.status in (401, 403):
            return finish(CrawlState.LOGIN_REQUIRED)
        if result.status == 404:
            api_missing = True
            break
        if result.status != 200:
            annotations.append(f"HTTP {result.status} on listing page {page}")
            return finish(CrawlState.UNREACHABLE)
        try:
            page_triples = _parse_listing(host, result.text)
        except (ValueError, json.JSONDecodeError) as exc:
            annotations.append(f"page {page}: parse failure: {exc}")
            break
        if not page_triples:
            break
        for owner, name, clone_url in page_triples:
            triples.setdefault((owner, name), (owner, name, clone_url))
        if len(page_triples) < limits.per_page:
            break
        page += 1
    else:
        annotations.append(f"pagination cap {limits.page_cap} reached")

    if api_missing:
        try:
            fallback, notes = _html_fallback(host, fetcher, limits, pacer)
        except TransportError as exc:
            annotations.append(f"transport failure: {exc}")
            return finish(CrawlState.UNREACHABLE)
        annotations.extend(notes)
        for triple in fallback:
            triples.setdefault((triple[0], triple[1]), triple)

    if triples:
        return finish(CrawlState.LISTED)
    return finish(CrawlState.NO_PUBLIC_REPOS)


def crawl_corpus(
    hosts: Iterable[HostRecord],
    fetcher: Fetcher,
    limits: RateLimitConfig,
    store,
    force: bool = False,
) -> dict[str, int]:
    """Crawl many hosts concurrently (serially within each host).

    Results persist through the corpus store; hosts that already have a
    persisted status are skipped unless ``force``. Returns status counts for
    the whole persisted corpus.
    """
    done: dict[tuple, HostCrawlStatus] = {
        tuple(s.host_key): s for s in (HostCrawlStatus.from_json(o) for o in store.read_jsonl("crawl_status"))
    }
    todo = [
        h
        for h in hosts
        if h.kind in (ForgeKind.GITEA, ForgeKind.GOGS, ForgeKind.GITLAB_CE)
        and (force or h.key not in done)
    ]
    lock = threading.Lock()

    def work(host: HostRecord) -> None:
        refs, status = enumerate_repos(host, fetcher, limits)
        with lock:
            for ref in refs:
                store.append_jsonl("crawl_repos", ref.to_json())
            store.append_jsonl("crawl_status", status.to_json())
            done[host.key] = status

    if todo:
        with ThreadPoolExecutor(max_workers=max(1, min(limits.concurrency, len(todo)))) as pool:
            list(pool.map(work, todo))

    summary: dict[str, int] = {}
    for status in done.values():
        summary[status.state.value] = summary.get(status.state.value, 0) + 1
    return summary

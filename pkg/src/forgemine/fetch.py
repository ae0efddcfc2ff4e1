"""Small HTTP fetch layer with a redirect policy suited to crawling.

Everything that talks to the network goes through a ``Fetcher`` so tests can
substitute canned responses. Redirects are never followed implicitly: the
policy in :func:`fetch_with_redirects` follows at most ``max_hops`` hops and
only within the same registrable domain, because a forge that redirects to a
different domain (typically a large central platform) must be annotated, not
crawled.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from typing import Optional, Protocol
from urllib.parse import urljoin, urlparse

import requests

from .errors import TransportError

DEFAULT_TIMEOUT = 30.0
MAX_REDIRECT_HOPS = 5


@dataclass
class FetchResult:
    url: str
    status: int
    headers: dict = field(default_factory=dict)
    body: bytes = b""

    @property
    def text(self) -> str:
        """Body decoded leniently; real-world pages are frequently mis-encoded."""
        return self.body.decode("utf-8", errors="replace")

    @property
    def is_redirect(self) -> bool:
        return self.status in (301, 302, 303, 307, 308) and "location" in self.headers

    @property
    def redirect_target(self) -> Optional[str]:
        loc = self.headers.get("location")
        return urljoin(self.url, loc) if loc else None


class Fetcher(Protocol):
    def fetch(self, url: str, timeout: float = DEFAULT_TIMEOUT) -> FetchResult:
        """Perform one GET without following redirects.

        Raises TransportError on any network-level failure.
        """


class RequestsFetcher:
    """Default fetcher backed by ``requests``; one request, no redirects."""

    def __init__(self, user_agent: str = "forgemine/0.1"):
        self._session = requests.Session()
        self._session.headers["User-Agent"] = user_agent

    def fetch(self, url: str, timeout: float = DEFAULT_TIMEOUT) -> FetchResult:
        try:
            resp = self._session.get(url, timeout=timeout, allow_redirects=False)
        except requests.RequestException as exc:
            raise TransportError(f"{url}: {exc}") from exc
        headers = {k.lower(): v for k, v in resp.headers.items()}
        return FetchResult(url=url, status=resp.status_code, headers=headers, body=resp.content)


def registrable_domain(host: str) -> str:
    """Approximate eTLD+1: the last two dot-separated labels.

    IP literals and single-label hosts are returned unchanged. A public
    suffix list would be more precise; two labels is good enough to keep a
    crawl from wandering onto an unrelated platform.
    """
    host = host.lower().rstrip(".")
    try:
        ipaddress.ip_address(host)
        return host
    except ValueError:
        pass
    labels = host.split(".")
    if len(labels) <= 2:
        return host
    return ".".join(labels[-2:])


def same_registrable_domain(url_a: str, url_b: str) -> bool:
    host_a = urlparse(url_a).hostname or ""
    host_b = urlparse(url_b).hostname or ""
    return registrable_domain(host_a) == registrable_domain(host_b)


def fetch_with_redirects(
    fetcher: Fetcher,
    url: str,
    timeout: float = DEFAULT_TIMEOUT,
    max_hops: int = MAX_REDIRECT_HOPS,
) -> tuple[FetchResult, Optional[str]]:
    """Fetch ``url`` following same-domain redirects up to ``max_hops``.

    Returns ``(result, annotation)``. A cross-domain redirect or hop overrun
    stops the chain: the redirect response itself is returned together with
    an annotation describing why it was not followed.
    """
    current = url
    for _ in range(max_hops + 1):
        result = fetcher.fetch(current, timeout=timeout)
        if not result.is_redirect:
            return result, None
        target = result.redirect_target
        if target is None:
            return result, "redirect without location"
        if not same_registrable_domain(current, target):
            return result, f"cross-domain redirect to {target}"
        current = target
    return result, f"redirect chain exceeded {max_hops} hops"

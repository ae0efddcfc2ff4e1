"""Identify which forge software a web host runs.

Detection matches exact HTML marker substrings against a host's front page.
Each supported forge ships a default rule whose marker appears on the
software's stock front page; operators can extend or replace the rule set
with a JSON-lines file. Hosts can come from a line-oriented export file or
from an external scan-API client.
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Protocol

from .errors import AuthError, InputError, QuotaError, TransportError
from .fetch import Fetcher, fetch_with_redirects


class ForgeKind(str, Enum):
    GITLAB_CE = "gitlab-ce"
    GOGS = "gogs"
    GITEA = "gitea"
    UNKNOWN = "unknown"


# Gitea began as a fork of Gogs and its pages can still contain Gogs-era
# markup, so the most specific software is always checked first.
_PRECEDENCE = {
    ForgeKind.GITEA: 0,
    ForgeKind.GOGS: 1,
    ForgeKind.GITLAB_CE: 2,
    ForgeKind.UNKNOWN: 3,
}


@dataclass(frozen=True)
class FingerprintRule:
    kind: ForgeKind
    marker: str
    version_pattern: Optional[str] = None

    def __post_init__(self):
        if not self.marker:
            raise ValueError("fingerprint marker must be non-empty")


# Markers re-derived from each package's stock front-page template; the
# GitLab one is the og:site_name meta tag the software has emitted for years.
DEFAULT_RULES = [
    FingerprintRule(
        kind=ForgeKind.GITEA,
        marker='content="go,git,self-hosted,gitea"',
        version_pattern=r"Gitea Version:?\s*v?([0-9][0-9A-Za-z.+-]*)",
    ),
    FingerprintRule(
        kind=ForgeKind.GITEA,
        marker="Powered by Gitea",
        version_pattern=r"Gitea Version:?\s*v?([0-9][0-9A-Za-z.+-]*)",
    ),
    FingerprintRule(
        kind=ForgeKind.GOGS,
        marker="Gogs is a painless self-hosted Git service",
        version_pattern=r"Gogs\s+Version:?\s*v?([0-9][0-9A-Za-z.+-]*)",
    ),
    FingerprintRule(
        kind=ForgeKind.GOGS,
        marker="Powered by Gogs",
        version_pattern=r"Gogs\s+Version:?\s*v?([0-9][0-9A-Za-z.+-]*)",
    ),
    FingerprintRule(
        kind=ForgeKind.GITLAB_CE,
        marker='<meta content="GitLab" property="og:site_name">',
        version_pattern=None,
    ),
]


@dataclass
class HostRecord:
    address: str
    port: int
    scheme: str = "https"
    kind: ForgeKind = ForgeKind.UNKNOWN
    version: Optional[str] = None
    observed_at: Optional[datetime] = None
    annotation: Optional[str] = None

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        if self.scheme not in ("http", "https"):
            raise ValueError(f"unsupported scheme: {self.scheme}")

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.address, self.port, self.scheme)

    @property
    def base_url(self) -> str:
        return f"{self.scheme}://{self.address}:{self.port}"

    def to_json(self) -> dict:
        return {
            "address": self.address,
            "port": self.port,
            "scheme": self.scheme,
            "kind": self.kind.value,
            "version": self.version,
            "observed_at": self.observed_at.isoformat() if self.observed_at else None,
            "annotation": self.annotation,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HostRecord":
        observed = obj.get("observed_at")
        return cls(
            address=obj["address"],
            port=int(obj["port"]),
            scheme=obj.get("scheme", "https"),
            kind=ForgeKind(obj.get("kind", "unknown")),
            version=obj.get("version"),
            observed_at=datetime.fromisoformat(observed) if observed else None,
            annotation=obj.get("annotation"),
        )


def detect_forge(html: str, rules: Iterable[FingerprintRule]) -> tuple[ForgeKind, Optional[str]]:
    """Match ``html`` against ``rules`` and return (kind, version).

    Pure function. Rules are tried most-specific forge first (Gitea, then
    Gogs, then GitLab CE); the first matching rule wins. Text that matches no
    marker yields ``(UNKNOWN, None)``.
    """
    ordered = sorted(rules, key=lambda r: _PRECEDENCE[r.kind])
    if not ordered:
        raise ValueError("rule set must be non-empty")
    for rule in ordered:
        if rule.marker in html:
            version = None
            if rule.version_pattern:
                m = re.search(rule.version_pattern, html)
                if m:
                    version = m.group(1)
            return rule.kind, version
    return ForgeKind.UNKNOWN, None


def load_rules(path: str | Path) -> list[FingerprintRule]:
    """Read a JSON-lines rule file: fields kind, marker, version_pattern."""
    rules = []
    try:
        lines = Path(path).read_text(encoding="utf-8", errors="replace").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read rules file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            rules.append(
                FingerprintRule(
                    kind=ForgeKind(obj["kind"]),
                    marker=obj["marker"],
                    version_pattern=obj.get("version_pattern"),
                )
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{path}:{lineno}: bad rule: {exc}") from exc
    if not rules:
        raise InputError(f"{path}: no rules found")
    return rules


def _parse_host_line(line: str) -> HostRecord:
    """One host entry: either bare ``host[:port]`` or a JSON record."""
    if line.startswith("{"):
        obj = json.loads(line)
        address = obj.get("address") or obj.get("host")
        if not address:
            raise ValueError("record has no address")
        port = obj.get("port")
        scheme = obj.get("scheme")
        if port is None:
            port, scheme = 443, scheme or "https"
        port = int(port)
        if scheme is None:
            scheme = "https" if port == 443 else "http"
        return HostRecord(address=address, port=port, scheme=scheme)
    # Bare form. No port means the operator gave just a name: assume TLS.
    if "://" in line:
        raise ValueError("URLs are not accepted; use host:port or a JSON record")
    if ":" in line:
        address, _, port_text = line.rpartition(":")
        port = int(port_text)
        scheme = "https" if port == 443 else "http"
    else:
        address, port, scheme = line, 443, "https"
    if not address:
        raise ValueError("empty address")
    return HostRecord(address=address, port=port, scheme=scheme)


def ingest_host_list(path: str | Path) -> tuple[list[HostRecord], list[tuple[int, str]]]:
    """Import hosts from a file, one entry per line.

    Returns ``(records, skipped)`` where ``skipped`` holds (line number,
    reason) pairs for malformed lines. Records are deduplicated by
    (address, port, scheme); kind stays UNKNOWN until the host is probed.
    """
    try:
        text = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise InputError(f"cannot read host list {path}: {exc}") from exc
    records: dict[tuple, HostRecord] = {}
    skipped: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = _parse_host_line(line)
        except (ValueError, KeyError, TypeError) as exc:
            skipped.append((lineno, str(exc)))
            continue
        records.setdefault(record.key, record)
    return list(records.values()), skipped


class ScanApiClient(Protocol):
    """One page of scan results for a marker query.

    Returns ``(hosts, has_next)`` where each host is a dict with at least
    ``address`` and ``port`` (optionally ``scheme``). Implementations raise
    AuthError, QuotaError, or TransportError as appropriate.
    """

    def search(self, query: str, page: int) -> tuple[list[dict], bool]: ...


class HttpScanClient:
    """Client for a Shodan-style scan API over HTTPS.

    The credential is read from the environment (never from config files).
    Endpoint contract: ``GET {base_url}/search?query=...&page=N`` with the
    key in the ``Authorization: Bearer`` header, answering
    ``{"hosts": [{"address": ..., "port": ...}, ...], "next_page": int|null}``.
    """

    def __init__(self, base_url: str, key_env: str = "SCAN_API_KEY", timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        key = os.environ.get(key_env)
        if not key:
            raise AuthError(f"scan API credential missing: set ${key_env}")
        self._key = key
        self._timeout = timeout

    def search(self, query: str, page: int) -> tuple[list[dict], bool]:
        import requests

        try:
            resp = requests.get(
                f"{self.base_url}/search",
                params={"query": query, "page": page},
                headers={"Authorization": f"Bearer {self._key}"},
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 401:
            raise AuthError("scan API rejected credentials (401)")
        if resp.status_code == 429:
            raise QuotaError("scan API quota exhausted (429)")
        if resp.status_code != 200:
            raise TransportError(f"scan API returned HTTP {resp.status_code}")
        payload = resp.json()
        return payload.get("hosts", []), payload.get("next_page") is not None


def query_scan_api(
    client: ScanApiClient,
    rules: Iterable[FingerprintRule],
    page_cap: int = 1000,
) -> tuple[list[HostRecord], list[str]]:
    """Query the scan API once per rule marker and merge the results.

    Pagination runs to exhaustion or ``page_cap``. Hosts seen under several
    rules keep the kind of the most specific forge (rule precedence).
    Authentication failures abort; quota or transport failures mid-run return
    the partial result set together with warning records.
    """
    merged: dict[tuple, HostRecord] = {}
    warnings: list[str] = []
    for rule in sorted(rules, key=lambda r: _PRECEDENCE[r.kind]):
        page = 1
        while page <= page_cap:
            try:
                hosts, has_next = client.search(rule.marker, page)
            except AuthError:
                raise
            except (QuotaError, TransportError) as exc:
                warnings.append(f"{rule.kind.value} marker, page {page}: {exc}")
                break
            for obj in hosts:
                try:
                    port = int(obj["port"])
                    scheme = obj.get("scheme") or ("https" if port == 443 else "http")
                    record = HostRecord(
                        address=obj["address"], port=port, scheme=scheme, kind=rule.kind
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    warnings.append(f"{rule.kind.value} marker, page {page}: bad host: {exc}")
                    continue
                merged.setdefault(record.key, record)
            if not has_next:
                break
            page += 1
        else:
            warnings.append(f"{rule.kind.value} marker: page cap {page_cap} reached")
    return list(merged.values()), warnings


def probe_host(
    host: HostRecord,
    fetcher: Fetcher,
    rules: Iterable[FingerprintRule],
    timeout: float = 30.0,
) -> HostRecord:
    """Fetch the host's front page and re-fingerprint it.

    Unreachable hosts come back UNKNOWN with an annotation; probing never
    raises for ordinary network failure.
    """
    url = host.base_url + "/"
    try:
        result, annotation = fetch_with_redirects(fetcher, url, timeout=timeout)
    except TransportError as exc:
        return replace(
            host,
            kind=ForgeKind.UNKNOWN,
            version=None,
            observed_at=datetime.now(timezone.utc),
            annotation=f"unreachable: {exc}",
        )
    kind, version = detect_forge(result.text, rules)
    return replace(
        host,
        kind=kind,
        version=version,
        observed_at=datetime.now(timezone.utc),
        annotation=annotation,
    )


def probe_hosts(
    hosts: Iterable[HostRecord],
    fetcher: Fetcher,
    rules: Iterable[FingerprintRule],
    concurrency: int = 32,
    timeout: float = 30.0,
) -> list[HostRecord]:
    """Probe many hosts concurrently under a global connection cap."""
    hosts = list(hosts)
    rules = list(rules)
    if not hosts:
        return []
    results: list[Optional[HostRecord]] = [None] * len(hosts)

    def work(i: int) -> None:
        results[i] = probe_host(hosts[i], fetcher, rules, timeout=timeout)

    with ThreadPoolExecutor(max_workers=max(1, min(concurrency, len(hosts)))) as pool:
        list(pool.map(work, range(len(hosts))))
    return [r for r in results if r is not None]

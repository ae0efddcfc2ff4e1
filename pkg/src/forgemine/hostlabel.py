"""Host-level labeling: academic status, geolocation, cross-host emails.

A host is academic when strictly more than half of the unique author emails
seen across its repositories come from academic domains (a curated
university-domain list plus the ``.edu`` suffix). Obviously fake addresses
are filtered first, since defaults like you@example.com would otherwise
pollute every census.
"""

from __future__ import annotations

import ipaddress
import json
import socket
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

from .errors import ConfigError, InputError

# Known automated committers whose addresses say nothing about the host.
DEFAULT_BOT_EMAILS = frozenset(
    {
        "anonymous@overleaf.com",
        "noreply@github.com",
        "noreply@gitlab.com",
        "actions@github.com",
        "badger@gitter.im",
        "snyk-bot@snyk.io",
        "support@dependabot.com",
    }
)

_FAKE_DOMAINS = frozenset({"example.com", "example.org"})


@dataclass(frozen=True)
class DomainList:
    domains: frozenset[str]

    @classmethod
    def from_iterable(cls, domains: Iterable[str]) -> "DomainList":
        cleaned = set()
        for d in domains:
            d = d.strip().lower().rstrip(".")
            if d:
                cleaned.add(d)
        return cls(domains=frozenset(cleaned))

    @classmethod
    def from_file(cls, path: str | Path) -> "DomainList":
        """Load a domain list: newline-delimited text or the community JSON
        format (a JSON array of objects carrying a ``domains`` array)."""
        try:
            text = Path(path).read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            raise InputError(f"cannot read domain list {path}: {exc}") from exc
        stripped = text.lstrip()
        if stripped.startswith("["):
            try:
                entries = json.loads(text)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: bad JSON domain list: {exc}") from exc
            domains: list[str] = []
            for entry in entries:
                if isinstance(entry, str):
                    domains.append(entry)
                elif isinstance(entry, dict):
                    domains.extend(entry.get("domains", []))
            return cls.from_iterable(domains)
        return cls.from_iterable(
            line for line in text.splitlines() if line.strip() and not line.startswith("#")
        )


@dataclass
class HostProfile:
    host_key: tuple[str, int, str]
    unique_emails: tuple[str, ...]
    academic_email_fraction: float
    is_academic: bool
    region: Optional[str] = None  # continent code
    country: Optional[str] = None
    repo_count: int = 0

    def to_json(self) -> dict:
        return {
            "host_key": list(self.host_key),
            "unique_emails": list(self.unique_emails),
            "academic_email_fraction": self.academic_email_fraction,
            "is_academic": self.is_academic,
            "region": self.region,
            "country": self.country,
            "repo_count": self.repo_count,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HostProfile":
        return cls(
            host_key=tuple(obj["host_key"]),
            unique_emails=tuple(obj.get("unique_emails", ())),
            academic_email_fraction=obj["academic_email_fraction"],
            is_academic=obj["is_academic"],
            region=obj.get("region"),
            country=obj.get("country"),
            repo_count=obj.get("repo_count", 0),
        )


def filter_fake_emails(
    emails: Iterable[str], denylist: frozenset[str] = DEFAULT_BOT_EMAILS
) -> set[str]:
    """Drop addresses that cannot identify a person.

    Removed: addresses without an @, domains without a dot (root@localhost,
    bare usernames), the example.com/example.org placeholders, and known bot
    addresses. Idempotent.
    """
    kept = set()
    for email in emails:
        email = email.strip().lower()
        if "@" not in email:
            continue
        local, _, domain = email.rpartition("@")
        if not local or "." not in domain:
            continue
        if domain in _FAKE_DOMAINS:
            continue
        if email in denylist:
            continue
        kept.add(email)
    return kept


def is_academic_email(email: str, domain_list: DomainList) -> bool:
    """True when the email's domain is (a subdomain of) a listed academic
    domain or ends in .edu."""
    domain = email.rsplit("@", 1)[-1].lower()
    if domain == "edu" or domain.endswith(".edu"):
        return True
    for listed in domain_list.domains:
        if domain == listed or domain.endswith("." + listed):
            return True
    return False


def label_host(
    host_key: tuple[str, int, str],
    emails: Iterable[str],
    domain_list: DomainList,
    threshold: float = 0.5,
    repo_count: int = 0,
    region: Optional[str] = None,
    country: Optional[str] = None,
) -> HostProfile:
    """Academic-labeling fragment of a host profile.

    ``emails`` must already be the post-filter unique set for the host.
    The threshold is strict: exactly 50% academic is not academic.
    """
    unique = sorted(set(emails))
    academic = sum(1 for e in unique if is_academic_email(e, domain_list))
    fraction = academic / len(unique) if unique else 0.0
    return HostProfile(
        host_key=host_key,
        unique_emails=tuple(unique),
        academic_email_fraction=fraction,
        is_academic=fraction > threshold,
        region=region,
        country=country,
        repo_count=repo_count,
    )


class GeoProvider(Protocol):
    def lookup(self, ip: str) -> tuple[Optional[str], Optional[str]]:
        """(country code, continent code) for an IP, (None, None) on miss."""


class FileGeoProvider:
    """Geolocation from a local JSON database file (reproducible, offline).

    File format: an object mapping IPs or CIDR prefixes to
    ``[country, continent]`` pairs, e.g. ``{"130.108.0.0/16": ["US", "NA"]}``.
    Longest matching prefix wins.
    """

    def __init__(self, path: str | Path):
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load geo database {path}: {exc}") from exc
        self._exact: dict[str, tuple[str, str]] = {}
        self._networks: list[tuple[ipaddress._BaseNetwork, tuple[str, str]]] = []
        for key, value in raw.items():
            pair = (value[0], value[1])
            if "/" in key:
                self._networks.append((ipaddress.ip_network(key, strict=False), pair))
            else:
                self._exact[key] = pair
        self._networks.sort(key=lambda item: item[0].prefixlen, reverse=True)

    def lookup(self, ip: str) -> tuple[Optional[str], Optional[str]]:
        if ip in self._exact:
            return self._exact[ip]
        try:
            addr = ipaddress.ip_address(ip)
        except ValueError:
            return None, None
        for network, pair in self._networks:
            if addr in network:
                return pair
        return None, None


def geolocate(
    address: str,
    geo: GeoProvider,
    resolver: Callable[[str], str] = socket.gethostbyname,
) -> tuple[Optional[str], Optional[str]]:
    """Best-effort (country, continent) for a hostname or IP literal."""
    try:
        ipaddress.ip_address(address)
        ip = address
    except ValueError:
        try:
            ip = resolver(address)
        except OSError:
            return None, None
    return geo.lookup(ip)


@dataclass
class EmailCensus:
    hosts_per_email: dict[int, int]  # histogram: #hosts -> #emails
    multi_host: list[str]
    multi_country: list[str]
    multi_continent: list[str]

    def to_json(self) -> dict:
        return {
            "hosts_per_email": {str(k): v for k, v in sorted(self.hosts_per_email.items())},
            "multi_host": self.multi_host,
            "multi_country": self.multi_country,
            "multi_continent": self.multi_continent,
        }


def cross_host_emails(profiles: Iterable[HostProfile]) -> EmailCensus:
    """How many hosts, countries, and continents each email appears on."""
    hosts_by_email: dict[str, set[tuple]] = {}
    countries_by_email: dict[str, set[str]] = {}
    continents_by_email: dict[str, set[str]] = {}
    for profile in profiles:
        for email in profile.unique_emails:
            hosts_by_email.setdefault(email, set()).add(profile.host_key)
            if profile.country:
                countries_by_email.setdefault(email, set()).add(profile.country)
            if profile.region:
                continents_by_email.setdefault(email, set()).add(profile.region)
    histogram: dict[int, int] = {}
    for email, hosts in hosts_by_email.items():
        histogram[len(hosts)] = histogram.get(len(hosts), 0) + 1
    return EmailCensus(
        hosts_per_email=histogram,
        multi_host=sorted(e for e, h in hosts_by_email.items() if len(h) >= 2),
        multi_country=sorted(e for e, c in countries_by_email.items() if len(c) >= 2),
        multi_continent=sorted(e for e, c in continents_by_email.items() if len(c) >= 2),
    )

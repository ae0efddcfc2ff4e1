"""Repository overlap classification via first/last commit hashes.

A repository whose first commit hash exists in another corpus is a copy of
something there; whether its latest hash also exists decides between a
complete copy and a diverged fork. Commit hashes chain over full content
history, so hash equality is treated as content equality (collisions are
ignored as attack-only events). A failed lookup is *unknown*, never novel.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Protocol

from .errors import AuthError, QuotaError, TransportError
from .gitread import RepoSnapshot


class OverlapClass(str, Enum):
    NOVEL = "novel"
    DUPLICATE_COMPLETE = "duplicate-complete"
    DIVERGED = "diverged"


@dataclass
class OverlapReport:
    repo_id: str
    target: str
    first_hash_found: bool
    last_hash_found: Optional[bool]
    overlap: OverlapClass
    queried_at: Optional[datetime] = None

    def to_json(self) -> dict:
        return {
            "repo_id": self.repo_id,
            "target": self.target,
            "first_hash_found": self.first_hash_found,
            "last_hash_found": self.last_hash_found,
            "overlap": self.overlap.value,
            "queried_at": self.queried_at.isoformat() if self.queried_at else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OverlapReport":
        queried = obj.get("queried_at")
        return cls(
            repo_id=obj["repo_id"],
            target=obj["target"],
            first_hash_found=obj["first_hash_found"],
            last_hash_found=obj.get("last_hash_found"),
            overlap=OverlapClass(obj["overlap"]),
            queried_at=datetime.fromisoformat(queried) if queried else None,
        )


def classify_overlap(first_found: bool, last_found: Optional[bool]) -> OverlapClass:
    """Map the two found-flags onto the overlap taxonomy.

    ``last_found`` is None only for single-commit repositories, whose first
    commit *is* their latest: finding it means a complete copy exists.
    """
    if not first_found:
        return OverlapClass.NOVEL
    if last_found is None or last_found:
        return OverlapClass.DUPLICATE_COMPLETE
    return OverlapClass.DIVERGED


class HashSearchClient(Protocol):
    """Answer whether one commit hash exists in a target corpus.

    Raises AuthError / QuotaError / TransportError; a plain False means the
    corpus authoritatively does not contain the hash.
    """

    def contains(self, commit_hash: str) -> bool: ...


class GitHubHashClient:
    """Commit-search client for a GitHub-style API."""

    def __init__(
        self,
        base_url: str = "https://api.github.com",
        token_env: str = "GITHUB_TOKEN",
        timeout: float = 30.0,
    ):
        import os

        self.base_url = base_url.rstrip("/")
        self._token = os.environ.get(token_env)
        self._timeout = timeout

    def contains(self, commit_hash: str) -> bool:
        import requests

        headers = {"Accept": "application/vnd.github.cloak-preview+json"}
        if self._token:
            headers["Authorization"] = f"token {self._token}"
        url = f"{self.base_url}/search/commits?q=hash:{commit_hash}"
        try:
            resp = requests.get(url, headers=headers, timeout=self._timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 401:
            raise AuthError("hash search rejected credentials (401)")
        if resp.status_code == 429 or (
            resp.status_code == 403 and "rate limit" in resp.text.lower()
        ):
            raise QuotaError(f"hash search throttled ({resp.status_code})")
        if resp.status_code != 200:
            raise TransportError(f"hash search returned HTTP {resp.status_code}")
        return resp.json().get("total_count", 0) > 0


class SoftwareHeritageHashClient:
    """Revision-lookup client for a Software Heritage-style archive API."""

    def __init__(
        self,
        base_url: str = "https://archive.softwareheritage.org",
        token_env: str = "SWH_TOKEN",
        timeout: float = 30.0,
    ):
        import os

        self.base_url = base_url.rstrip("/")
        self._token = os.environ.get(token_env)
        self._timeout = timeout

    def contains(self, commit_hash: str) -> bool:
        import requests

        headers = {}
        if self._token:
            headers["Authorization"] = f"Bearer {self._token}"
        url = f"{self.base_url}/api/1/revision/{commit_hash}/"
        try:
            resp = requests.get(url, headers=headers, timeout=self._timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 200:
            return True
        if resp.status_code == 404:
            return False
        if resp.status_code == 401:
            raise AuthError("revision lookup rejected credentials (401)")
        if resp.status_code == 429:
            raise QuotaError("revision lookup throttled (429)")
        raise TransportError(f"revision lookup returned HTTP {resp.status_code}")


class HashLookupCache:
    """Disk-backed (target, hash) -> found cache; reruns cost nothing.

    Concurrent readers share the in-memory view; writes are serialized and
    append-only.
    """

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str], bool] = {}
        if self._path.exists():
            for line in self._path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                self._entries[(obj["target"], obj["hash"])] = obj["found"]

    def get(self, target: str, commit_hash: str) -> Optional[bool]:
        return self._entries.get((target, commit_hash))

    def put(self, target: str, commit_hash: str, found: bool) -> None:
        with self._lock:
            self._entries[(target, commit_hash)] = found
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {"target": target, "hash": commit_hash, "found": found},
                        sort_keys=True,
                    )
                    + "\n"
                )


def _lookup(
    client: HashSearchClient, target: str, commit_hash: str, cache: Optional[HashLookupCache]
) -> bool:
    if cache is not None:
        cached = cache.get(target, commit_hash)
        if cached is not None:
            return cached
    found = client.contains(commit_hash)
    if cache is not None:
        cache.put(target, commit_hash, found)
    return found


def check_remote(
    repo: RepoSnapshot,
    client: HashSearchClient,
    target: str,
    cache: Optional[HashLookupCache] = None,
) -> OverlapReport:
    """Classify one repository against a remote corpus.

    The latest hash is queried only when the first was found and the
    repository has more than one commit. Lookup errors propagate so the
    caller can retry; an errored repository is never classified Novel.
    """
    first_found = _lookup(client, target, repo.first_commit_hash, cache)
    last_found: Optional[bool] = None
    if first_found and repo.commit_count >= 2:
        last_found = _lookup(client, target, repo.last_commit_hash, cache)
    return OverlapReport(
        repo_id=repo.repo_id,
        target=target,
        first_hash_found=first_found,
        last_hash_found=last_found,
        overlap=classify_overlap(first_found, last_found),
        queried_at=datetime.now(timezone.utc),
    )


def check_corpus(
    snapshots: Iterable[RepoSnapshot],
    client: HashSearchClient,
    target: str,
    cache: Optional[HashLookupCache] = None,
    retries: int = 2,
    retry_wait_s: float = 0.0,
) -> tuple[dict[str, OverlapReport], list[str]]:
    """check_remote over a corpus with bounded retries.

    Returns ``(reports by repo_id, pending repo_ids)``; pending repositories
    exhausted their retries on quota/transport errors and stay unclassified.
    Authentication errors abort immediately (retrying cannot help).
    """
    reports: dict[str, OverlapReport] = {}
    pending: list[str] = []
    for snap in snapshots:
        attempt = 0
        while True:
            try:
                reports[snap.repo_id] = check_remote(snap, client, target, cache)
                break
            except AuthError:
                raise
            except (QuotaError, TransportError):
                attempt += 1
                if attempt > retries:
                    pending.append(snap.repo_id)
                    break
                if retry_wait_s:
                    time.sleep(retry_wait_s)
    return reports, pending


@dataclass
class MirrorGroup:
    first_hash: str
    repo_ids: list[str]
    mirror_ids: list[str]  # members sharing their last hash with another member
    diverged_ids: list[str]

    def to_json(self) -> dict:
        return {
            "first_hash": self.first_hash,
            "repo_ids": self.repo_ids,
            "mirror_ids": self.mirror_ids,
            "diverged_ids": self.diverged_ids,
        }


@dataclass
class MirrorCensus:
    groups: list[MirrorGroup]
    group_count: int
    repos_in_groups: int
    non_diverged_count: int
    diverged_count: int
    single_commit_members: int

    def to_json(self) -> dict:
        return {
            "groups": [g.to_json() for g in self.groups],
            "group_count": self.group_count,
            "repos_in_groups": self.repos_in_groups,
            "non_diverged_count": self.non_diverged_count,
            "diverged_count": self.diverged_count,
            "single_commit_members": self.single_commit_members,
        }


def intra_corpus_mirrors(snapshots: Iterable[RepoSnapshot]) -> MirrorCensus:
    """Find mirror/fork groups inside one corpus.

    Repositories sharing a first commit hash form a group; within a group,
    members whose last hash is shared with at least one other member are
    non-diverged mirrors, the rest diverged forks.
    """
    by_first: dict[str, list[RepoSnapshot]] = {}
    for snap in snapshots:
        by_first.setdefault(snap.first_commit_hash, []).append(snap)

    groups: list[MirrorGroup] = []
    single_commit = 0
    for first_hash in sorted(by_first):
        members = sorted(by_first[first_hash], key=lambda s: s.repo_id)
        if len(members) < 2:
            continue
        last_counts: dict[str, int] = {}
        for snap in members:
            last_counts[snap.last_commit_hash] = last_counts.get(snap.last_commit_hash, 0) + 1
        mirrors = [s.repo_id for s in members if last_counts[s.last_commit_hash] >= 2]
        diverged = [s.repo_id for s in members if last_counts[s.last_commit_hash] == 1]
        single_commit += sum(1 for s in members if s.commit_count == 1)
        groups.append(
            MirrorGroup(
                first_hash=first_hash,
                repo_ids=[s.repo_id for s in members],
                mirror_ids=mirrors,
                diverged_ids=diverged,
            )
        )
    return MirrorCensus(
        groups=groups,
        group_count=len(groups),
        repos_in_groups=sum(len(g.repo_ids) for g in groups),
        non_diverged_count=sum(len(g.mirror_ids) for g in groups),
        diverged_count=sum(len(g.diverged_ids) for g in groups),
        single_commit_members=single_commit,
    )


def margin_filter(
    snapshots: Iterable[RepoSnapshot],
    reports: dict[str, OverlapReport],
) -> tuple[list[str], list[str]]:
    """Analysis-eligible repositories: those Novel against the remote corpus.

    Duplicated repositories are excluded even when diverged, to keep a clean
    margin between populations. Repositories without a resolved report are
    returned separately as pending, never silently treated as eligible.
    """
    eligible: list[str] = []
    pending: list[str] = []
    for snap in sorted(snapshots, key=lambda s: s.repo_id):
        report = reports.get(snap.repo_id)
        if report is None:
            pending.append(snap.repo_id)
        elif report.overlap is OverlapClass.NOVEL:
            eligible.append(snap.repo_id)
    return eligible, pending

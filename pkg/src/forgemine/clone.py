"""Clone enumerated repositories and record the outcome taxonomy.

Clones are bare (metadata extraction never needs a working tree, and this
halves disk usage). A cheap pre-flight request against the smart-HTTP
``info/refs`` endpoint catches redirects and authentication challenges
before git is spawned, because git itself follows redirects silently.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional
from urllib.parse import quote

from .errors import TransportError
from .fetch import Fetcher, RequestsFetcher
from .crawl import RepoRef


class CloneState(str, Enum):
    SUCCESS = "success"
    REDIRECTED = "redirected"
    AUTH_REQUIRED = "auth-required"
    FAILED = "failed"
    EMPTY = "empty"


@dataclass
class CloneOutcome:
    state: CloneState
    local_path: Optional[str] = None
    target: Optional[str] = None
    reason: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "state": self.state.value,
            "local_path": self.local_path,
            "target": self.target,
            "reason": self.reason,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CloneOutcome":
        return cls(
            state=CloneState(obj["state"]),
            local_path=obj.get("local_path"),
            target=obj.get("target"),
            reason=obj.get("reason"),
        )


@dataclass
class CloneLimits:
    timeout_mins: float = 30.0
    retries: int = 2
    concurrency: int = 4


def _safe(component: str) -> str:
    return quote(component, safe=".-_")


def local_path_for(ref: RepoRef, dest_root: str | Path) -> Path:
    """Deterministic on-disk location for a repository clone.

    Pure function of (host key, owner, name) so interrupted runs resume
    without re-cloning.
    """
    address, port, _ = ref.host_key
    return (
        Path(dest_root)
        / f"{_safe(address)}_{port}"
        / _safe(ref.owner)
        / f"{_safe(ref.name)}.git"
    )


def _preflight(ref: RepoRef, fetcher: Fetcher, timeout: float) -> Optional[CloneOutcome]:
    """Probe the upload-pack advertisement; catch redirects / auth walls."""
    url = ref.clone_url.rstrip("/") + "/info/refs?service=git-upload-pack"
    try:
        result = fetcher.fetch(url, timeout=timeout)
    except TransportError as exc:
        return CloneOutcome(state=CloneState.FAILED, reason=f"unreachable: {exc}")
    if result.is_redirect:
        return CloneOutcome(state=CloneState.REDIRECTED, target=result.redirect_target)
    if result.status in (401, 407):
        return CloneOutcome(state=CloneState.AUTH_REQUIRED, reason=f"HTTP {result.status}")
    return None


def _commit_count(repo_path: Path) -> int:
    proc = subprocess.run(
        ["git", "-C", str(repo_path), "rev-list", "--all", "--count"],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        return 0
    return int(proc.stdout.strip() or 0)


def clone_repo(
    ref: RepoRef,
    dest_root: str | Path,
    limits: CloneLimits | None = None,
    fetcher: Optional[Fetcher] = None,
) -> CloneOutcome:
    """Bare-clone one repository and classify the result.

    Zero-commit repositories are deleted and reported Empty; partial clones
    never survive a failure.
    """
    limits = limits or CloneLimits()
    fetcher = fetcher or RequestsFetcher()
    path = local_path_for(ref, dest_root)
    if path.exists() and _commit_count(path) >= 1:
        return CloneOutcome(state=CloneState.SUCCESS, local_path=str(path))

    early = _preflight(ref, fetcher, timeout=min(limits.timeout_mins * 60, 60.0))
    if early is not None:
        return early

    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        shutil.rmtree(path)
    env = dict(os.environ)
    env.update(
        {
            "GIT_TERMINAL_PROMPT": "0",
            "GIT_ASKPASS": "/bin/true",
            "GIT_CONFIG_GLOBAL": "/dev/null",
            "GIT_CONFIG_SYSTEM": "/dev/null",
        }
    )
    try:
        proc = subprocess.run(
            ["git", "clone", "--quiet", "--bare", ref.clone_url, str(path)],
            capture_output=True,
            text=True,
            timeout=limits.timeout_mins * 60,
            env=env,
        )
    except subprocess.TimeoutExpired:
        shutil.rmtree(path, ignore_errors=True)
        return CloneOutcome(state=CloneState.FAILED, reason="timeout")
    except OSError as exc:
        shutil.rmtree(path, ignore_errors=True)
        return CloneOutcome(state=CloneState.FAILED, reason=str(exc))
    if proc.returncode != 0:
        stderr = proc.stderr.strip().splitlines()
        reason = stderr[-1] if stderr else f"git exited {proc.returncode}"
        shutil.rmtree(path, ignore_errors=True)
        if "authentication" in reason.lower() or "401" in reason:
            return CloneOutcome(state=CloneState.AUTH_REQUIRED, reason=reason)
        return CloneOutcome(state=CloneState.FAILED, reason=reason)
    if _commit_count(path) == 0:
        shutil.rmtree(path, ignore_errors=True)
        return CloneOutcome(state=CloneState.EMPTY)
    return CloneOutcome(state=CloneState.SUCCESS, local_path=str(path))


def clone_corpus(
    refs: Iterable[RepoRef],
    dest_root: str | Path,
    limits: CloneLimits,
    store,
    fetcher: Optional[Fetcher] = None,
) -> dict[str, int]:
    """Clone a corpus resumably.

    Success and Empty outcomes are never retried; Failed outcomes are
    retried up to ``limits.retries`` additional attempts across runs. Every
    attempt is appended to the store, so the attempt history is auditable.
    Clones run concurrently across hosts but serially within one host.
    """
    refs = list(refs)
    attempts: dict[str, list[CloneOutcome]] = {}
    for obj in store.read_jsonl("clone_attempts"):
        attempts.setdefault(obj["repo_id"], []).append(CloneOutcome.from_json(obj["outcome"]))

    lock = threading.Lock()
    final: dict[str, CloneOutcome] = {rid: outs[-1] for rid, outs in attempts.items()}

    def needs_attempt(ref: RepoRef) -> bool:
        history = attempts.get(ref.repo_id, [])
        if not history:
            return True
        last = history[-1]
        if last.state is CloneState.FAILED:
            return len(history) < 1 + limits.retries
        return False

    by_host: dict[tuple, list[RepoRef]] = {}
    for ref in refs:
        if needs_attempt(ref):
            by_host.setdefault(ref.host_key, []).append(ref)

    def work(host_refs: list[RepoRef]) -> None:
        for ref in host_refs:
            while True:
                outcome = clone_repo(ref, dest_root, limits, fetcher)
                with lock:
                    store.append_jsonl(
                        "clone_attempts", {"repo_id": ref.repo_id, "outcome": outcome.to_json()}
                    )
                    attempts.setdefault(ref.repo_id, []).append(outcome)
                    final[ref.repo_id] = outcome
                    exhausted = len(attempts[ref.repo_id]) >= 1 + limits.retries
                if outcome.state is not CloneState.FAILED or exhausted:
                    break

    groups = list(by_host.values())
    if groups:
        with ThreadPoolExecutor(max_workers=max(1, min(limits.concurrency, len(groups)))) as pool:
            list(pool.map(work, groups))

    summary: dict[str, int] = {}
    for ref in refs:
        outcome = final.get(ref.repo_id)
        state = outcome.state.value if outcome else CloneState.FAILED.value
        summary[state] = summary.get(state, 0) + 1
    return summary

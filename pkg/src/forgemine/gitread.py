"""Read per-commit metadata and snapshot facts from a cloned repository.

All reads go through the system git executable in plumbing modes; nothing
here needs a working tree. The commit history of the main branch means the
full ancestor set of its head (all parents of merges), ordered by author
time with the hash as tie-breaker so ordering is stable across platforms.

File attribution convention: a merge commit's changed paths are its diff
against the *first* parent, so files merged in from side branches are not
double-counted; a root commit introduces all of its paths.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import EmptyRepositoryError, ExtractionError

_RECORD_SEP = "\x1e"
_FIELD_SEP = "\x1f"


@dataclass(frozen=True)
class CommitMeta:
    hash: str
    author_email: str
    author_time: int  # seconds since epoch, UTC
    message_length: int
    parent_hashes: tuple[str, ...] = ()
    changed_paths: tuple[str, ...] = ()
    annotation: Optional[str] = None

    def to_json(self) -> dict:
        obj = {
            "hash": self.hash,
            "author_email": self.author_email,
            "author_time": self.author_time,
            "message_length": self.message_length,
            "parent_hashes": list(self.parent_hashes),
            "changed_paths": list(self.changed_paths),
        }
        if self.annotation:
            obj["annotation"] = self.annotation
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "CommitMeta":
        return cls(
            hash=obj["hash"],
            author_email=obj["author_email"],
            author_time=int(obj["author_time"]),
            message_length=int(obj["message_length"]),
            parent_hashes=tuple(obj.get("parent_hashes", ())),
            changed_paths=tuple(obj.get("changed_paths", ())),
            annotation=obj.get("annotation"),
        )


@dataclass
class RepoSnapshot:
    repo_id: str
    main_branch: str
    head_paths: tuple[str, ...]
    remote_branch_count: int
    first_commit_hash: str
    last_commit_hash: str
    commit_count: int

    def to_json(self) -> dict:
        return {
            "repo_id": self.repo_id,
            "main_branch": self.main_branch,
            "head_paths": list(self.head_paths),
            "remote_branch_count": self.remote_branch_count,
            "first_commit_hash": self.first_commit_hash,
            "last_commit_hash": self.last_commit_hash,
            "commit_count": self.commit_count,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RepoSnapshot":
        return cls(
            repo_id=obj["repo_id"],
            main_branch=obj["main_branch"],
            head_paths=tuple(obj.get("head_paths", ())),
            remote_branch_count=int(obj["remote_branch_count"]),
            first_commit_hash=obj["first_commit_hash"],
            last_commit_hash=obj["last_commit_hash"],
            commit_count=int(obj["commit_count"]),
        )


def _git(repo: str | Path, *args: str, binary: bool = False):
    cmd = ["git", "-C", str(repo), "-c", "core.quotepath=off", *args]
    proc = subprocess.run(cmd, capture_output=True)
    if proc.returncode != 0:
        raise ExtractionError(
            f"git {' '.join(args[:2])} failed in {repo}: "
            f"{proc.stderr.decode('utf-8', 'replace').strip()}"
        )
    if binary:
        return proc.stdout
    return proc.stdout.decode("utf-8", errors="replace")


def _branch_refs(repo: str | Path) -> tuple[list[str], bool]:
    """Branch names and whether they came from remote-tracking refs.

    A bare clone carries the remote's branches directly under refs/heads;
    a working clone tracks them under refs/remotes/<remote>/. Either way the
    HEAD alias is not a branch.
    """
    out = _git(repo, "for-each-ref", "--format=%(refname)", "refs/remotes")
    remote_refs = [line for line in out.splitlines() if line]
    if remote_refs:
        names = []
        for ref in remote_refs:
            parts = ref.split("/", 3)  # refs/remotes/<remote>/<name...>
            if len(parts) < 4 or parts[3] == "HEAD":
                continue
            names.append(parts[3])
        return names, True
    out = _git(repo, "for-each-ref", "--format=%(refname:lstrip=2)", "refs/heads")
    return [line for line in out.splitlines() if line], False


def resolve_main_branch(repo: str | Path) -> str:
    """Name of the repository's main branch.

    Preference order: the remote HEAD symbolic target, then ``main`` or
    ``master`` if they exist, then the lexicographically first branch.
    """
    branches, remote = _branch_refs(repo)
    if not branches:
        raise EmptyRepositoryError(f"{repo}: no branches")
    head_ref = "refs/remotes/origin/HEAD" if remote else "HEAD"
    proc = subprocess.run(
        ["git", "-C", str(repo), "symbolic-ref", "-q", head_ref],
        capture_output=True,
        text=True,
    )
    if proc.returncode == 0:
        target = proc.stdout.strip().rsplit("/", 1)[-1]
        if target in branches:
            return target
    for candidate in ("main", "master"):
        if candidate in branches:
            return candidate
    return sorted(branches)[0]


def main_ref(repo: str | Path, main: str) -> str:
    """Full ref for the main branch name, preferring the remote-tracking ref."""
    branches, remote = _branch_refs(repo)
    if main not in branches:
        raise ExtractionError(f"{repo}: branch {main!r} not found")
    return f"refs/remotes/origin/{main}" if remote else f"refs/heads/{main}"


def extract_history(repo: str | Path, main: str) -> list[CommitMeta]:
    """Every commit reachable from the main head, oldest first.

    Author emails are lowercased here, exactly once; message length counts
    characters of the leniently decoded message (interior newlines included,
    the trailing newline git stores excluded).
    """
    ref = main_ref(repo, main)
    out = _git(
        repo,
        "log",
        "--root",
        "--diff-merges=first-parent",
        "--name-only",
        f"--format={_RECORD_SEP}%H{_FIELD_SEP}%P{_FIELD_SEP}%ae{_FIELD_SEP}%at{_FIELD_SEP}%B{_FIELD_SEP}",
        ref,
    )
    commits: list[CommitMeta] = []
    for record in out.split(_RECORD_SEP):
        if not record.strip():
            continue
        fields = record.split(_FIELD_SEP)
        if len(fields) != 6:
            commits.append(
                CommitMeta(
                    hash=fields[0].strip() if fields else "",
                    author_email="",
                    author_time=0,
                    message_length=0,
                    annotation=f"extraction-failure: malformed record ({len(fields)} fields)",
                )
            )
            continue
        commit_hash, parents, email, at_text, body, tail = fields
        annotation = None
        try:
            author_time = int(at_text.strip())
        except ValueError:
            author_time = 0
            annotation = "extraction-failure: unparsable author time"
        message = body.rstrip("\n")
        paths = tuple(line for line in tail.splitlines() if line)
        commits.append(
            CommitMeta(
                hash=commit_hash.strip(),
                author_email=email.strip().lower(),
                author_time=author_time,
                message_length=len(message),
                parent_hashes=tuple(parents.split()),
                changed_paths=paths,
                annotation=annotation,
            )
        )
    commits.sort(key=lambda c: (c.author_time, c.hash))
    return commits


def count_branches(repo: str | Path) -> int:
    """Number of remote branches, excluding the HEAD alias."""
    return len(_branch_refs(repo)[0])


def head_file_list(repo: str | Path, main: str) -> list[str]:
    """Blob paths at the main head tree; symlinks and submodules excluded."""
    ref = main_ref(repo, main)
    out = _git(repo, "ls-tree", "-r", "-z", "--full-tree", ref, binary=True)
    paths = []
    for entry in out.split(b"\0"):
        if not entry:
            continue
        meta, _, path = entry.partition(b"\t")
        mode = meta.split(b" ", 1)[0]
        if mode in (b"100644", b"100755"):
            paths.append(path.decode("utf-8", errors="replace"))
    return paths


def read_blob(repo: str | Path, main: str, path: str) -> Optional[bytes]:
    """Raw contents of one blob at the main head, or None if unreadable."""
    ref = main_ref(repo, main)
    try:
        return _git(repo, "show", f"{ref}:{path}", binary=True)
    except ExtractionError:
        return None


def build_snapshot(repo: str | Path, repo_id: str, history: list[CommitMeta]) -> RepoSnapshot:
    """Assemble the snapshot record for an already-extracted repository."""
    if not history:
        raise EmptyRepositoryError(f"{repo_id}: no commits")
    main = resolve_main_branch(repo)
    return RepoSnapshot(
        repo_id=repo_id,
        main_branch=main,
        head_paths=tuple(head_file_list(repo, main)),
        remote_branch_count=count_branches(repo),
        first_commit_hash=history[0].hash,
        last_commit_hash=history[-1].hash,
        commit_count=len(history),
    )

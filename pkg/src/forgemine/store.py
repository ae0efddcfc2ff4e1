"""Persistent corpus store: append-only JSON-lines files plus a manifest.

One store directory holds everything a pipeline run produces. Stage outputs
are append-only JSON-lines (streamable, diff-friendly); the manifest records
which stages completed and under which config hash, so reruns resume instead
of repeating work. A lock file keeps concurrent pipelines out of one store.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Optional
from urllib.parse import quote

from .errors import StoreError

_FILES = {
    "hosts": "hosts.jsonl",
    "hosts_probed": "hosts_probed.jsonl",
    "crawl_repos": "crawl_repos.jsonl",
    "crawl_status": "crawl_status.jsonl",
    "clone_attempts": "clone_attempts.jsonl",
    "comparison_refs": "comparison_refs.jsonl",
    "dedup_reports": "dedup_reports.jsonl",
    "host_profiles": "host_profiles.jsonl",
}


class CorpusStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._append_lock = threading.Lock()

    # -- paths ---------------------------------------------------------

    def path(self, name: str) -> Path:
        if name in _FILES:
            return self.root / _FILES[name]
        return self.root / name

    def extract_dir(self, corpus: str) -> Path:
        d = self.root / "extract" / corpus
        d.mkdir(parents=True, exist_ok=True)
        return d

    def extract_file(self, corpus: str, repo_id: str) -> Path:
        return self.extract_dir(corpus) / (quote(repo_id, safe="") + ".jsonl")

    def clones_dir(self, corpus: str) -> Path:
        d = self.root / "clones" / corpus
        d.mkdir(parents=True, exist_ok=True)
        return d

    def reports_dir(self) -> Path:
        d = self.root / "reports"
        d.mkdir(parents=True, exist_ok=True)
        return d

    def exports_dir(self) -> Path:
        d = self.root / "exports"
        d.mkdir(parents=True, exist_ok=True)
        return d

    # -- JSON-lines ----------------------------------------------------

    def append_jsonl(self, name: str, obj: dict) -> None:
        line = json.dumps(obj, sort_keys=True, ensure_ascii=False)
        try:
            with self._append_lock:
                with self.path(name).open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
        except OSError as exc:
            raise StoreError(f"cannot append to {name}: {exc}") from exc

    def read_jsonl(self, name: str) -> list[dict]:
        p = self.path(name)
        if not p.exists():
            return []
        try:
            return [
                json.loads(line)
                for line in p.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreError(f"cannot read {name}: {exc}") from exc

    def write_json(self, name: str, obj) -> None:
        p = self.path(name)
        p.parent.mkdir(parents=True, exist_ok=True)
        tmp = p.with_suffix(p.suffix + ".tmp")
        try:
            tmp.write_text(
                json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            tmp.replace(p)
        except OSError as exc:
            raise StoreError(f"cannot write {name}: {exc}") from exc

    def read_json(self, name: str):
        p = self.path(name)
        if not p.exists():
            return None
        return json.loads(p.read_text(encoding="utf-8"))

    # -- manifest ------------------------------------------------------

    @property
    def _manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def manifest(self) -> dict:
        if self._manifest_path.exists():
            return json.loads(self._manifest_path.read_text(encoding="utf-8"))
        return {"stages": {}, "seed": None}

    def _save_manifest(self, manifest: dict) -> None:
        tmp = self._manifest_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        tmp.replace(self._manifest_path)

    def mark_stage(self, stage: str, config_hash: str, seed: Optional[int] = None) -> None:
        manifest = self.manifest()
        manifest["stages"][stage] = {"config_hash": config_hash, "completed": True}
        if seed is not None:
            manifest["seed"] = seed
        self._save_manifest(manifest)

    def stage_record(self, stage: str) -> Optional[dict]:
        return self.manifest()["stages"].get(stage)

    def clear_stage(self, stage: str) -> None:
        manifest = self.manifest()
        manifest["stages"].pop(stage, None)
        self._save_manifest(manifest)

    # -- lock ----------------------------------------------------------

    def acquire_lock(self) -> "StoreLock":
        return StoreLock(self.root / ".lock")


class StoreLock:
    """One pipeline instance per store directory."""

    def __init__(self, path: Path):
        self._path = path

    def __enter__(self) -> "StoreLock":
        if self._path.exists():
            try:
                pid = int(self._path.read_text().strip())
                os.kill(pid, 0)
            except (ValueError, ProcessLookupError):
                self._path.unlink()  # stale lock from a dead process
            except PermissionError:
                raise StoreError(f"store is locked by pid in {self._path}")
            else:
                raise StoreError(f"store is locked by running pid {pid}")
        try:
            fd = os.open(self._path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreError(f"store is locked: {self._path}")
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc_info) -> None:
        try:
            self._path.unlink()
        except OSError:
            pass

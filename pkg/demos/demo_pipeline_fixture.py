#!/usr/bin/env python3
"""Run the whole pipeline against a throwaway local fixture forge.

Builds three small git repositories (one empty, one mirror pair), serves
them over a local HTTP server that mimics a Gitea-style forge, and runs
every stage: scan -> probe -> crawl -> clone -> extract -> metrics ->
dedup -> label -> stats -> report. Prints the per-stage summaries and the
final comparison table.

Usage: python demos/demo_pipeline_fixture.py
"""

import json
import sys
import tempfile
import threading
from http.server import ThreadingHTTPServer
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import _ForgeHandler, ForgeFixture
from repo_fixtures import (
    bare_clone,
    bare_empty,
    build_delta_repo,
    build_gamma_repo,
    build_oracle_repo,
)

from forgemine.pipeline import load_config, run_all
from forgemine.store import CorpusStore

tmp = Path(tempfile.mkdtemp(prefix="forgemine_demo_"))
root, work = tmp / "forge_root", tmp / "work"

alpha = build_oracle_repo(work / "alpha")
bare_clone(alpha, root / "repos" / "team" / "alpha.git")
bare_clone(alpha, root / "repos" / "team" / "beta.git")  # exact mirror
bare_empty(root / "repos" / "team" / "hollow.git")
bare_clone(build_gamma_repo(work / "gamma"), root / "clones" / "org1" / "gamma.git")
bare_clone(build_delta_repo(work / "delta"), root / "clones" / "org1" / "delta.git")

server = ThreadingHTTPServer(("127.0.0.1", 0), _ForgeHandler)
_ForgeHandler.fixture = fixture = ForgeFixture(root=root, host="127.0.0.1", port=server.server_address[1])
threading.Thread(target=server.serve_forever, daemon=True).start()
print(f"fixture forge listening on {fixture.base_url}\n")

hosts_file = tmp / "hosts.txt"
hosts_file.write_text(f"127.0.0.1:{fixture.port}\n")
data = Path(__file__).resolve().parent.parent / "tests" / "data"

config = load_config(
    overrides={
        "seed": 42,
        "rate": {"min_interval_s": 0.0},
        "scan": {"hosts_file": str(hosts_file)},
        "clone": {"timeout_mins": 2, "retries": 1, "concurrency": 2},
        "comparison": {
            "events_file": str(data / "events.jsonl"),
            "oversample_factor": 1.5,
            "clone_base_url": f"{fixture.base_url}/clones",
        },
        "dedup": {"github": {"enabled": True, "base_url": f"{fixture.base_url}/ghapi"}},
        "label": {
            "university_domains_file": str(data / "university_domains.txt"),
            "geo_file": str(data / "geo.json"),
        },
        "stats": {"include_language": False, "features": ["commits"], "rare_language_threshold": 1},
        "report": {"population_file": str(data / "population.json")},
    }
)

store = CorpusStore(tmp / "store")
for summary in run_all(config, store):
    print(json.dumps(summary, default=str))

print(f"\nstore: {store.root}\n")
print((store.reports_dir() / "comparison.txt").read_text())
print((store.reports_dir() / "overlap.txt").read_text())
server.shutdown()

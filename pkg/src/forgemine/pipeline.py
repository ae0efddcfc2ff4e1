"""Stage pipeline: scan, probe, crawl, clone, extract, metrics, dedup,
label, stats, report.

Stages run strictly in order against one corpus store; each stage records
the config hash it ran under, so a rerun is a no-op unless the config
changed (refused without --force) or the stage never completed. All
randomness flows from the single configured seed.

The time-matched comparison corpus is handled inside the extract stage: its
per-month sampling plan depends on the forge corpus's first-commit months,
which exist only after forge extraction.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional
from urllib.parse import urlparse

from . import reports as reports_mod
from .clone import CloneLimits, CloneOutcome, CloneState, clone_corpus
from .crawl import RateLimitConfig, RepoRef, crawl_corpus
from .dedup import (
    GitHubHashClient,
    HashLookupCache,
    SoftwareHeritageHashClient,
    check_corpus,
    intra_corpus_mirrors,
    margin_filter,
)
from .errors import ConfigDriftError, ConfigError, InputError, StageOrderError
from .fetch import Fetcher, RequestsFetcher
from .fingerprint import (
    DEFAULT_RULES,
    ForgeKind,
    HostRecord,
    HttpScanClient,
    ingest_host_list,
    load_rules,
    probe_hosts,
    query_scan_api,
)
from .gitread import CommitMeta, RepoSnapshot, build_snapshot, extract_history, resolve_main_branch
from .hostlabel import (
    DomainList,
    FileGeoProvider,
    cross_host_emails,
    filter_fake_emails,
    geolocate,
    label_host,
)
from .metrics import (
    METRIC_FIELDS,
    NUMERIC_METRICS,
    RepoMetrics,
    compute_repo_metrics,
    tally_languages,
)
from .stats import (
    DEFAULT_FEATURES,
    build_design_matrix,
    ks_two_sample,
    logistic_fit,
    summarize,
)
from .store import CorpusStore

STAGES = [
    "scan",
    "probe",
    "crawl",
    "clone",
    "extract",
    "metrics",
    "dedup",
    "label",
    "stats",
    "report",
]

FORGE = "forge"
COMPARISON = "comparison"

DEFAULT_CONFIG: dict = {
    "seed": 0,
    "rate": {
        "min_interval_s": 1.0,
        "concurrency": 32,
        "page_cap": 10_000,
        "per_page": 50,
        "timeout_s": 30.0,
    },
    "scan": {
        "hosts_file": None,
        "rules_file": None,
        "api": {"base_url": None, "key_env": "SCAN_API_KEY", "page_cap": 1000},
    },
    "clone": {"retries": 2, "timeout_mins": 30.0, "concurrency": 4},
    "comparison": {
        "events_file": None,
        "oversample_factor": 1.5,
        "clone_base_url": "https://github.com",
    },
    "dedup": {
        "retries": 2,
        "github": {
            "enabled": True,
            "base_url": "https://api.github.com",
            "token_env": "GITHUB_TOKEN",
        },
        "software_heritage": {
            "enabled": False,
            "base_url": "https://archive.softwareheritage.org",
            "token_env": "SWH_TOKEN",
        },
    },
    "label": {
        "university_domains_file": None,
        "geo_file": None,
        "academic_threshold": 0.5,
    },
    "stats": {
        "include_language": True,
        "features": list(DEFAULT_FEATURES),
        "rare_language_threshold": 1000,
        "outcome_positive": FORGE,
        "baseline_language": "JavaScript",
    },
    "report": {"population_file": None},
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> dict:
    """Effective config: defaults, then the config file, then CLI overrides."""
    config = DEFAULT_CONFIG
    if path is not None:
        try:
            file_cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {path}: {exc}") from exc
        config = _deep_merge(config, file_cfg)
    if overrides:
        config = _deep_merge(config, overrides)
    return config


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass
class ComparisonPlan:
    targets: dict[str, int]  # month "YYYY-MM" -> planned sample count
    factor: float

    def to_json(self) -> dict:
        return {"targets": dict(sorted(self.targets.items())), "factor": self.factor}

    @classmethod
    def from_json(cls, obj: dict) -> "ComparisonPlan":
        return cls(targets=dict(obj["targets"]), factor=obj["factor"])


def build_comparison_plan(months: dict[str, int], factor: float = 1.5) -> ComparisonPlan:
    """Per-month sampling targets: the reference histogram scaled by the
    oversampling factor, rounded up."""
    if not months:
        raise ValueError("reference month histogram is empty")
    if factor < 1.0:
        raise ValueError("oversample factor must be >= 1")
    targets = {month: math.ceil(count * factor) for month, count in months.items()}
    return ComparisonPlan(targets=targets, factor=factor)


def ingest_comparison_corpus(
    events_file: str | Path,
    plan: ComparisonPlan,
    seed: int,
    clone_base_url: str,
) -> tuple[list[RepoRef], list[str]]:
    """Sample repository-creation events per month, without replacement.

    The events file is JSON-lines of ``{"full_name": ..., "created_at": ...}``
    prepared externally (e.g. exported from an event archive). Sampling is
    uniform within each month, deterministic under the seed; months with
    fewer events than their target are annotated as shortfalls.
    """
    try:
        lines = Path(events_file).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read events file {events_file}: {exc}") from exc
    by_month: dict[str, list[tuple[str, str]]] = {}
    annotations: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            full_name = obj.get("full_name") or obj["repo"]
            created_at = obj["created_at"]
        except (json.JSONDecodeError, KeyError) as exc:
            annotations.append(f"line {lineno}: skipped ({exc})")
            continue
        by_month.setdefault(created_at[:7], []).append((full_name, created_at))

    parsed = urlparse(clone_base_url)
    address = parsed.hostname or clone_base_url
    scheme = parsed.scheme or "https"
    port = parsed.port or (443 if scheme == "https" else 80)
    base = clone_base_url.rstrip("/")

    rng = random.Random(seed)
    refs: list[RepoRef] = []
    seen: set[str] = set()
    for month in sorted(plan.targets):
        pool = sorted(set(by_month.get(month, [])))
        target = plan.targets[month]
        if len(pool) < target:
            annotations.append(
                f"month {month}: shortfall, {len(pool)} events for target {target}"
            )
        chosen = rng.sample(pool, min(target, len(pool)))
        for full_name, created_at in sorted(chosen):
            if full_name in seen:
                continue
            seen.add(full_name)
            owner, _, name = full_name.rpartition("/")
            refs.append(
                RepoRef(
                    host_key=(address, port, scheme),
                    owner=owner or full_name,
                    name=name,
                    clone_url=f"{base}/{full_name}.git",
                    discovered_at=datetime.fromisoformat(created_at.replace("Z", "+00:00")),
                )
            )
    return refs, annotations


# ---------------------------------------------------------------------------
# stage bodies
# ---------------------------------------------------------------------------


def _rules(config: dict):
    rules_file = config["scan"].get("rules_file")
    return load_rules(rules_file) if rules_file else list(DEFAULT_RULES)


def _rate_limits(config: dict) -> RateLimitConfig:
    r = config["rate"]
    return RateLimitConfig(
        min_interval_s=r["min_interval_s"],
        concurrency=r["concurrency"],
        page_cap=r["page_cap"],
        per_page=r["per_page"],
        timeout_s=r["timeout_s"],
    )


def _clone_limits(config: dict) -> CloneLimits:
    c = config["clone"]
    return CloneLimits(
        timeout_mins=c["timeout_mins"], retries=c["retries"], concurrency=c["concurrency"]
    )


def _last_by_key(objs: list[dict], key_fn) -> dict:
    out = {}
    for obj in objs:
        out[key_fn(obj)] = obj
    return out


def stage_scan(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    scan_cfg = config["scan"]
    hosts: list[HostRecord] = []
    skipped: list = []
    warnings: list[str] = []
    if scan_cfg.get("hosts_file"):
        hosts, skipped = ingest_host_list(scan_cfg["hosts_file"])
    elif scan_cfg.get("api", {}).get("base_url"):
        client = HttpScanClient(
            base_url=scan_cfg["api"]["base_url"], key_env=scan_cfg["api"]["key_env"]
        )
        hosts, warnings = query_scan_api(client, _rules(config), scan_cfg["api"]["page_cap"])
    else:
        raise ConfigError("scan stage needs scan.hosts_file or scan.api.base_url")
    for host in hosts:
        store.append_jsonl("hosts", host.to_json())
    if skipped or warnings:
        store.write_json(
            "scan_annotations.json",
            {"skipped_lines": [list(s) for s in skipped], "warnings": warnings},
        )
    return {"hosts": len(hosts), "skipped": len(skipped), "warnings": len(warnings)}


def stage_probe(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    hosts = [
        HostRecord.from_json(o)
        for o in _last_by_key(
            store.read_jsonl("hosts"), lambda o: (o["address"], o["port"], o["scheme"])
        ).values()
    ]
    limits = _rate_limits(config)
    probed = probe_hosts(
        hosts, fetcher, _rules(config), concurrency=limits.concurrency, timeout=limits.timeout_s
    )
    summary: dict[str, int] = {}
    for host in probed:
        store.append_jsonl("hosts_probed", host.to_json())
        summary[host.kind.value] = summary.get(host.kind.value, 0) + 1
    return summary


def _probed_hosts(store: CorpusStore) -> list[HostRecord]:
    return [
        HostRecord.from_json(o)
        for o in _last_by_key(
            store.read_jsonl("hosts_probed"), lambda o: (o["address"], o["port"], o["scheme"])
        ).values()
    ]


def stage_crawl(config: dict, store: CorpusStore, fetcher: Fetcher, force: bool = False) -> dict:
    return crawl_corpus(_probed_hosts(store), fetcher, _rate_limits(config), store, force=force)


def _forge_refs(store: CorpusStore) -> list[RepoRef]:
    refs = [
        RepoRef.from_json(o)
        for o in _last_by_key(
            store.read_jsonl("crawl_repos"),
            lambda o: (tuple(o["host_key"]), o["owner"], o["name"]),
        ).values()
    ]
    return sorted(refs, key=lambda r: r.repo_id)


def _comparison_refs(store: CorpusStore) -> list[RepoRef]:
    refs = [
        RepoRef.from_json(o)
        for o in _last_by_key(
            store.read_jsonl("comparison_refs"),
            lambda o: (tuple(o["host_key"]), o["owner"], o["name"]),
        ).values()
    ]
    return sorted(refs, key=lambda r: r.repo_id)


def _clone_dest(config: dict, store: CorpusStore, corpus: str) -> Path:
    dest = config["clone"].get("dest")
    if dest:
        path = Path(dest) / corpus
        path.mkdir(parents=True, exist_ok=True)
        return path
    return store.clones_dir(corpus)


def stage_clone(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    refs = _forge_refs(store)
    return clone_corpus(refs, _clone_dest(config, store, FORGE), _clone_limits(config), store, fetcher)


def _final_outcomes(store: CorpusStore) -> dict[str, CloneOutcome]:
    outcomes: dict[str, CloneOutcome] = {}
    for obj in store.read_jsonl("clone_attempts"):
        outcomes[obj["repo_id"]] = CloneOutcome.from_json(obj["outcome"])
    return outcomes


def _extract_repo(store: CorpusStore, corpus: str, repo_id: str, local_path: str) -> bool:
    """Extract one repository into the store; returns False if already done."""
    out_path = store.extract_file(corpus, repo_id)
    if out_path.exists():
        return False
    main = resolve_main_branch(local_path)
    history = extract_history(local_path, main)
    snapshot = build_snapshot(local_path, repo_id, history)
    lines = [json.dumps({"type": "commit", **c.to_json()}, sort_keys=True) for c in history]
    lines.append(json.dumps({"type": "snapshot", **snapshot.to_json()}, sort_keys=True))
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return True


def load_extracted(
    store: CorpusStore, corpus: str
) -> dict[str, tuple[list[CommitMeta], RepoSnapshot]]:
    out: dict[str, tuple[list[CommitMeta], RepoSnapshot]] = {}
    directory = store.extract_dir(corpus)
    for path in sorted(directory.glob("*.jsonl")):
        history: list[CommitMeta] = []
        snapshot: Optional[RepoSnapshot] = None
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("type") == "snapshot":
                snapshot = RepoSnapshot.from_json(obj)
            else:
                history.append(CommitMeta.from_json(obj))
        if snapshot is not None:
            out[snapshot.repo_id] = (history, snapshot)
    return out


def stage_extract(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    outcomes = _final_outcomes(store)
    extracted_forge = 0
    for ref in _forge_refs(store):
        outcome = outcomes.get(ref.repo_id)
        if outcome and outcome.state is CloneState.SUCCESS and outcome.local_path:
            if _extract_repo(store, FORGE, ref.repo_id, outcome.local_path):
                extracted_forge += 1

    summary = {"forge_extracted": extracted_forge, "comparison_extracted": 0}

    events_file = config["comparison"].get("events_file")
    if events_file:
        forge = load_extracted(store, FORGE)
        months: dict[str, int] = {}
        for history, _snapshot in forge.values():
            month = datetime.fromtimestamp(history[0].author_time, tz=timezone.utc).strftime(
                "%Y-%m"
            )
            months[month] = months.get(month, 0) + 1
        plan = build_comparison_plan(months, config["comparison"]["oversample_factor"])
        store.write_json("comparison_plan.json", plan.to_json())
        refs, annotations = ingest_comparison_corpus(
            events_file, plan, config["seed"], config["comparison"]["clone_base_url"]
        )
        existing = {r.repo_id for r in _comparison_refs(store)}
        for ref in refs:
            if ref.repo_id not in existing:
                store.append_jsonl("comparison_refs", ref.to_json())
        if annotations:
            store.write_json("comparison_annotations.json", annotations)
        clone_corpus(
            _comparison_refs(store),
            _clone_dest(config, store, COMPARISON),
            _clone_limits(config),
            store,
            fetcher,
        )
        outcomes = _final_outcomes(store)
        for ref in _comparison_refs(store):
            outcome = outcomes.get(ref.repo_id)
            if outcome and outcome.state is CloneState.SUCCESS and outcome.local_path:
                if _extract_repo(store, COMPARISON, ref.repo_id, outcome.local_path):
                    summary["comparison_extracted"] += 1
    return summary


def stage_metrics(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    outcomes = _final_outcomes(store)
    summary = {}
    for corpus in (FORGE, COMPARISON):
        extracted = load_extracted(store, corpus)
        rows: list[RepoMetrics] = []
        for repo_id in sorted(extracted):
            history, snapshot = extracted[repo_id]
            outcome = outcomes.get(repo_id)
            if outcome is None or outcome.local_path is None:
                continue
            tally = tally_languages(
                outcome.local_path, snapshot.main_branch, snapshot.head_paths
            )
            rows.append(compute_repo_metrics(history, snapshot, tally))
        path = store.path(f"metrics_{corpus}.jsonl")
        path.write_text(
            "".join(json.dumps(m.to_json(), sort_keys=True) + "\n" for m in rows),
            encoding="utf-8",
        )
        with store.path(f"metrics_{corpus}.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(METRIC_FIELDS)
            for m in rows:
                obj = m.to_json()
                writer.writerow([obj[k] if obj[k] is not None else "" for k in METRIC_FIELDS])
        summary[corpus] = len(rows)
    return summary


def load_metrics(store: CorpusStore, corpus: str) -> list[dict]:
    return store.read_jsonl(f"metrics_{corpus}.jsonl")


def stage_dedup(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    forge = load_extracted(store, FORGE)
    snapshots = [snap for _hist, snap in forge.values()]
    snapshots.sort(key=lambda s: s.repo_id)
    cache = HashLookupCache(store.path("dedup_cache.jsonl"))
    summary: dict = {}

    github_cfg = config["dedup"]["github"]
    reports = {}
    pending: list[str] = []
    if github_cfg.get("enabled"):
        client = GitHubHashClient(
            base_url=github_cfg["base_url"], token_env=github_cfg["token_env"]
        )
        reports, pending = check_corpus(
            snapshots, client, "github", cache, retries=config["dedup"]["retries"]
        )
        for report in reports.values():
            store.append_jsonl("dedup_reports", report.to_json())
        eligible, unresolved = margin_filter(snapshots, reports)
        unresolved = sorted(set(unresolved) | set(pending))
        summary["github"] = {
            cls: sum(1 for r in reports.values() if r.overlap.value == cls)
            for cls in ("novel", "duplicate-complete", "diverged")
        }
    else:
        eligible = sorted(s.repo_id for s in snapshots)
        unresolved = []
        summary["github"] = "disabled: all repositories treated as eligible"
    store.write_json("eligible.json", {"eligible": eligible, "pending": unresolved})

    sh_cfg = config["dedup"]["software_heritage"]
    if sh_cfg.get("enabled"):
        client = SoftwareHeritageHashClient(
            base_url=sh_cfg["base_url"], token_env=sh_cfg["token_env"]
        )
        sh_reports, sh_pending = check_corpus(
            snapshots, client, "software-heritage", cache, retries=config["dedup"]["retries"]
        )
        for report in sh_reports.values():
            store.append_jsonl("dedup_reports", report.to_json())
        summary["software_heritage"] = {
            cls: sum(1 for r in sh_reports.values() if r.overlap.value == cls)
            for cls in ("novel", "duplicate-complete", "diverged")
        }

    census = intra_corpus_mirrors(snapshots)
    store.write_json("mirrors.json", census.to_json())
    summary["intra_corpus_groups"] = census.group_count
    summary["eligible"] = len(eligible)
    return summary


def stage_label(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    label_cfg = config["label"]
    domains = (
        DomainList.from_file(label_cfg["university_domains_file"])
        if label_cfg.get("university_domains_file")
        else DomainList.from_iterable([])
    )
    geo = FileGeoProvider(label_cfg["geo_file"]) if label_cfg.get("geo_file") else None

    refs_by_id = {r.repo_id: r for r in _forge_refs(store)}
    emails_by_host: dict[tuple, set[str]] = {}
    repos_by_host: dict[tuple, int] = {}
    for repo_id, (history, _snap) in load_extracted(store, FORGE).items():
        ref = refs_by_id.get(repo_id)
        if ref is None:
            continue
        emails = emails_by_host.setdefault(ref.host_key, set())
        emails.update(c.author_email for c in history)
        repos_by_host[ref.host_key] = repos_by_host.get(ref.host_key, 0) + 1

    profiles = []
    for host_key in sorted(emails_by_host):
        filtered = filter_fake_emails(emails_by_host[host_key])
        country = region = None
        if geo is not None:
            country, region = geolocate(host_key[0], geo)
        profiles.append(
            label_host(
                host_key,
                filtered,
                domains,
                threshold=label_cfg["academic_threshold"],
                repo_count=repos_by_host.get(host_key, 0),
                region=region,
                country=country,
            )
        )
    for profile in profiles:
        store.append_jsonl("host_profiles", profile.to_json())
    census = cross_host_emails(profiles)
    store.write_json("email_census.json", census.to_json())
    return {
        "hosts": len(profiles),
        "academic": sum(1 for p in profiles if p.is_academic),
    }


def stage_stats(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    stats_cfg = config["stats"]
    eligible_info = store.read_json("eligible.json") or {"eligible": []}
    eligible = set(eligible_info["eligible"])
    forge_rows = [m for m in load_metrics(store, FORGE) if m["repo_id"] in eligible]
    comparison_rows = load_metrics(store, COMPARISON)

    comparison_table: dict = {}
    for metric in NUMERIC_METRICS:
        a = [m[metric] for m in forge_rows if m.get(metric) is not None]
        b = [m[metric] for m in comparison_rows if m.get(metric) is not None]
        if not a or not b:
            comparison_table[metric] = {"note": "insufficient data"}
            continue
        comparison_table[metric] = {
            FORGE: summarize(a).to_json(),
            COMPARISON: summarize(b).to_json(),
            "ks": ks_two_sample(a, b).to_json(),
        }
    store.write_json("stats/comparison.json", comparison_table)

    labeled = [dict(m, corpus=FORGE) for m in forge_rows] + [
        dict(m, corpus=COMPARISON) for m in comparison_rows
    ]
    logistic_out: dict = {}
    model_rows: list[dict] = []
    try:
        design, census = build_design_matrix(
            labeled,
            outcome_positive=stats_cfg["outcome_positive"],
            include_language=stats_cfg["include_language"],
            features=stats_cfg["features"],
            rare_language_threshold=stats_cfg["rare_language_threshold"],
            baseline_language=stats_cfg["baseline_language"],
        )
        logistic_out["deletion_census"] = census.to_json()
        fit = logistic_fit(design)
        logistic_out["fit"] = fit.to_json()
    except Exception as exc:  # recorded, not fatal: tiny corpora legitimately fail
        logistic_out["error"] = {"type": type(exc).__name__, "message": str(exc)}
    store.write_json("stats/logistic.json", logistic_out)

    # Model table for the analytics component: model-2 feature set
    # (no language), listwise-deleted, with the binary outcome.
    features = [f for f in stats_cfg["features"]]
    with store.path("stats/model_table.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repo_id", "corpus", "outcome"] + features)
        for row in labeled:
            if any(row.get(f) is None for f in features):
                continue
            outcome = 1 if row["corpus"] == stats_cfg["outcome_positive"] else 0
            writer.writerow([row["repo_id"], row["corpus"], outcome] + [row[f] for f in features])
            model_rows.append(row)
    return {
        "metrics_compared": len(comparison_table),
        "model_rows": len(model_rows),
        "logistic": "fit" if "fit" in logistic_out else "error",
    }


def stage_report(config: dict, store: CorpusStore, fetcher: Fetcher) -> dict:
    return reports_mod.emit_reports(config, store)


_STAGE_FNS = {
    "scan": stage_scan,
    "probe": stage_probe,
    "crawl": stage_crawl,
    "clone": stage_clone,
    "extract": stage_extract,
    "metrics": stage_metrics,
    "dedup": stage_dedup,
    "label": stage_label,
    "stats": stage_stats,
    "report": stage_report,
}


def run_stage(
    name: str,
    config: dict,
    store: CorpusStore,
    force: bool = False,
    fetcher: Optional[Fetcher] = None,
) -> dict:
    """Run one stage with DAG and config-drift enforcement.

    Upstream stages must have completed under the current config hash; a
    completed stage is a no-op unless forced.
    """
    if name not in STAGES:
        raise ValueError(f"unknown stage {name!r}; stages: {', '.join(STAGES)}")
    fetcher = fetcher or RequestsFetcher()
    current_hash = config_hash(config)
    for upstream in STAGES[: STAGES.index(name)]:
        record = store.stage_record(upstream)
        if record is None or not record.get("completed"):
            raise StageOrderError(name, upstream)
        if record["config_hash"] != current_hash and not force:
            raise ConfigDriftError(
                f"stage {upstream!r} ran under config {record['config_hash']}, "
                f"current is {current_hash}; rerun with --force to accept"
            )
    record = store.stage_record(name)
    if record and record.get("completed") and record["config_hash"] == current_hash and not force:
        return {"stage": name, "skipped": "already complete"}

    with store.acquire_lock():
        if name == "crawl":
            summary = stage_crawl(config, store, fetcher, force=force)
        else:
            summary = _STAGE_FNS[name](config, store, fetcher)
    store.mark_stage(name, current_hash, seed=config.get("seed"))
    return {"stage": name, **summary}


def run_all(
    config: dict,
    store: CorpusStore,
    force: bool = False,
    fetcher: Optional[Fetcher] = None,
) -> list[dict]:
    return [run_stage(name, config, store, force=force, fetcher=fetcher) for name in STAGES]

"""Report emission: comparison, geographic, overlap, and model tables.

Every report is written twice: as JSON for machines and as an aligned text
table for reading. Distribution exports (one CSV per metric per corpus)
feed the plotting component. Output is deterministic: fixed row orders,
fixed float formatting, no timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import StageOrderError
from .metrics import NUMERIC_METRICS


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_table(headers: list[str], rows: list[list], title: str = "") -> str:
    table = [list(map(_fmt, headers))] + [[_fmt(cell) for cell in row] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(headers))]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(table[0], widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in table[1:]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _write(store, name: str, json_obj, text: str, written: list[str]) -> None:
    reports = store.reports_dir()
    (reports / f"{name}.json").write_text(
        json.dumps(json_obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (reports / f"{name}.txt").write_text(text, encoding="utf-8")
    written.extend([f"{name}.json", f"{name}.txt"])


def _comparison_report(store, written: list[str]) -> None:
    table = store.read_json("stats/comparison.json") or {}
    headers = [
        "statistic",
        "forge mean", "forge median", "forge p5", "forge p95",
        "cmp mean", "cmp median", "cmp p5", "cmp p95",
        "KS D", "KS p",
    ]
    rows = []
    for metric in NUMERIC_METRICS:
        entry = table.get(metric)
        if not entry or "note" in entry:
            rows.append([metric] + ["-"] * 10)
            continue
        f, c, ks = entry["forge"], entry["comparison"], entry["ks"]
        rows.append(
            [
                metric,
                f["mean"], f["median"], f["p5"], f["p95"],
                c["mean"], c["median"], c["p5"], c["p95"],
                ks["statistic"], ks["p_value"],
            ]
        )
    title = "Repository population comparison (summary statistics and two-sample KS)"
    _write(store, "comparison", table, render_table(headers, rows, title), written)


def _geographic_report(store, config, written: list[str]) -> None:
    profiles = store.read_jsonl("host_profiles")
    populations = {}
    pop_file = config["report"].get("population_file")
    if pop_file:
        populations = json.loads(Path(pop_file).read_text(encoding="utf-8"))

    by_region: dict[str, dict] = {}
    total_hosts = len(profiles)
    total_emails = sum(len(p["unique_emails"]) for p in profiles)
    for p in profiles:
        region = p.get("region") or "unknown"
        agg = by_region.setdefault(
            region, {"hosts": 0, "emails": 0, "academic_emails": 0, "repos": 0}
        )
        agg["hosts"] += 1
        agg["emails"] += len(p["unique_emails"])
        agg["repos"] += p.get("repo_count", 0)
        agg["academic_emails"] += round(p["academic_email_fraction"] * len(p["unique_emails"]))

    json_obj = {}
    rows = []
    for region in sorted(by_region):
        agg = by_region[region]
        pct_hosts = 100.0 * agg["hosts"] / total_hosts if total_hosts else 0.0
        pct_users = 100.0 * agg["emails"] / total_emails if total_emails else 0.0
        pct_academic = (
            100.0 * agg["academic_emails"] / agg["emails"] if agg["emails"] else 0.0
        )
        population = populations.get(region)
        per_capita = agg["repos"] / population if population else None
        json_obj[region] = {
            "pct_hosts": pct_hosts,
            "pct_users": pct_users,
            "repositories": agg["repos"],
            "per_capita": per_capita,
            "pct_academic_emails": pct_academic,
        }
        rows.append([region, pct_hosts, pct_users, agg["repos"], per_capita, pct_academic])
    if not rows:
        rows.append(["(no hosts labeled)"] + ["-"] * 5)
    headers = ["region", "% hosts", "% users", "repositories", "repos per capita", "% academic emails"]
    _write(store, "geographic", json_obj, render_table(headers, rows, "Geographic split of the forge corpus"), written)


def _overlap_report(store, written: list[str]) -> None:
    census = store.read_json("mirrors.json") or {}
    eligible = store.read_json("eligible.json") or {"eligible": [], "pending": []}
    reports = store.read_jsonl("dedup_reports")
    by_target: dict[str, dict[str, int]] = {}
    for r in reports:
        agg = by_target.setdefault(r["target"], {})
        agg[r["overlap"]] = agg.get(r["overlap"], 0) + 1
    json_obj = {
        "remote_overlap": by_target,
        "intra_corpus": {k: v for k, v in census.items() if k != "groups"},
        "eligible_count": len(eligible["eligible"]),
        "pending_count": len(eligible.get("pending", [])),
    }
    rows = []
    for target in sorted(by_target):
        agg = by_target[target]
        rows.append(
            [
                target,
                agg.get("novel", 0),
                agg.get("duplicate-complete", 0),
                agg.get("diverged", 0),
            ]
        )
    if not rows:
        rows.append(["(no remote targets checked)", "-", "-", "-"])
    text = render_table(
        ["target", "novel", "complete copies", "diverged"], rows, "Overlap with remote corpora"
    )
    text += "\nIntra-corpus mirror census\n"
    for key in (
        "group_count",
        "repos_in_groups",
        "non_diverged_count",
        "diverged_count",
        "single_commit_members",
    ):
        text += f"  {key}: {census.get(key, 0)}\n"
    text += f"\nAnalysis-eligible repositories: {len(eligible['eligible'])}"
    text += f" (pending lookups: {len(eligible.get('pending', []))})\n"
    _write(store, "overlap", json_obj, text, written)


def _logistic_report(store, written: list[str]) -> None:
    result = store.read_json("stats/logistic.json") or {}
    if "fit" in result:
        fit = result["fit"]
        rows = [
            [c["name"], c["odds"], c["p_value"], c["odds_ci_low"], c["odds_ci_high"]]
            for c in fit["coefficients"]
        ]
        text = render_table(
            ["term", "odds e^b", "p", "CI low", "CI high"],
            rows,
            "Logistic regression: forge-vs-comparison outcome",
        )
        text += f"\n-2LL: {_fmt(fit['deviance'])}\n"
        text += f"Pseudo-R2 (McFadden): {_fmt(fit['pseudo_r2'])}\n"
        text += f"Converged: {fit['converged']} in {fit['iterations']} iterations"
        text += f" over {fit['n_rows']} rows\n"
    else:
        error = result.get("error", {"message": "stats stage produced no fit"})
        text = "Logistic regression: not fitted\n"
        text += f"  {error.get('type', 'Error')}: {error.get('message', '')}\n"
    if "deletion_census" in result:
        census = result["deletion_census"]
        text += (
            f"Listwise deletion: kept {census['n_kept']} of {census['n_input']} rows"
            f" (dropped {census['n_dropped']})\n"
        )
    _write(store, "logistic", result, text, written)


def _distribution_exports(store, eligible: set[str], written: list[str]) -> None:
    from .pipeline import COMPARISON, FORGE, load_metrics  # local import: no cycle at module load

    exports = store.exports_dir()
    for corpus in (FORGE, COMPARISON):
        rows = load_metrics(store, corpus)
        if corpus == FORGE:
            rows = [m for m in rows if m["repo_id"] in eligible]
        for metric in NUMERIC_METRICS:
            values = [m[metric] for m in rows if m.get(metric) is not None]
            path = exports / f"{corpus}_{metric}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow([metric])
                for v in values:
                    writer.writerow([v])
            written.append(f"exports/{path.name}")


def _language_share_export(store, eligible: set[str], written: list[str]) -> None:
    from .pipeline import COMPARISON, FORGE, load_metrics

    forge_rows = [m for m in load_metrics(store, FORGE) if m["repo_id"] in eligible]
    comparison_rows = load_metrics(store, COMPARISON)
    path = store.exports_dir() / "language_shares.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["measure", "language", "share_forge", "share_comparison"])
        for measure, fld in (("loc", "top_language_by_loc"), ("files", "top_language_by_files")):
            def shares(rows):
                labeled = [m[fld] for m in rows if m.get(fld)]
                total = len(labeled)
                counts: dict[str, int] = {}
                for lang in labeled:
                    counts[lang] = counts.get(lang, 0) + 1
                return {lang: n / total for lang, n in counts.items()} if total else {}

            share_a = shares(forge_rows)
            share_b = shares(comparison_rows)
            for lang in sorted(set(share_a) | set(share_b)):
                writer.writerow([measure, lang, share_a.get(lang, 0.0), share_b.get(lang, 0.0)])
    written.append("exports/language_shares.csv")


def emit_reports(config: dict, store) -> dict:
    """Write all report files; refuses when upstream stages are missing."""
    for upstream in ("metrics", "dedup", "label", "stats"):
        record = store.stage_record(upstream)
        if record is None or not record.get("completed"):
            raise StageOrderError("report", upstream)
    eligible_info = store.read_json("eligible.json") or {"eligible": []}
    eligible = set(eligible_info["eligible"])

    written: list[str] = []
    _comparison_report(store, written)
    _geographic_report(store, config, written)
    _overlap_report(store, written)
    _logistic_report(store, written)
    _distribution_exports(store, eligible, written)
    _language_share_export(store, eligible, written)

    if not eligible:
        notice = "NOTICE: the analysis-eligible forge set is empty; comparison rows reflect zero forge repositories.\n"
        (store.reports_dir() / "NOTICE.txt").write_text(notice, encoding="utf-8")
        written.append("NOTICE.txt")
    return {"files": sorted(written)}

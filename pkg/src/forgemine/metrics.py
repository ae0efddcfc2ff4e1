"""Per-repository collaboration and temporal statistics.

Conventions that matter for comparability:

* Work is commit counts per unique (lowercased) author email; no identity
  disambiguation is attempted, so emails are a consistent lower-bound proxy
  for contributors across corpora.
* Daily activity bins are UTC calendar days spanning the first to the last
  commit inclusive, with zero-count days kept; the burstiness index is the
  population variance-to-mean ratio of those counts and is defined as 0 for
  single-commit repositories.
* The mean interevent gap telescopes to span/(n-1), so zero gaps (identical
  timestamps) are naturally included.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .gitread import CommitMeta, RepoSnapshot, read_blob

SECONDS_PER_HOUR = 3600.0
SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class WorkDistribution:
    counts: dict[str, int]
    total: int
    fractions: dict[str, float]

    @classmethod
    def from_counts(cls, counts: dict[str, int]) -> "WorkDistribution":
        if not counts:
            raise ValueError("work distribution needs at least one contributor")
        for who, w in counts.items():
            if w < 1:
                raise ValueError(f"contributor {who!r} has non-positive count {w}")
        ordered = dict(sorted(counts.items()))
        total = sum(ordered.values())
        fractions = {who: w / total for who, w in ordered.items()}
        return cls(counts=ordered, total=total, fractions=fractions)

    @classmethod
    def from_history(cls, history: list[CommitMeta]) -> "WorkDistribution":
        return cls.from_counts(Counter(c.author_email for c in history))

    @property
    def contributor_count(self) -> int:
        return len(self.counts)


@dataclass
class BurstinessSeries:
    window: str  # fixed to UTC calendar days
    daily_counts: list[int]
    mean: float
    variance: float


@dataclass
class LanguageTally:
    per_language: dict[str, dict[str, int]] = field(default_factory=dict)
    annotations: list[str] = field(default_factory=list)

    def add(self, language: str, loc: int) -> None:
        entry = self.per_language.setdefault(language, {"files": 0, "loc": 0})
        entry["files"] += 1
        entry["loc"] += loc

    @property
    def total_files(self) -> int:
        return sum(e["files"] for e in self.per_language.values())


@dataclass
class RepoMetrics:
    repo_id: str
    files: int
    committers: int
    commits: int
    branches: int
    avg_message_length: float
    avg_editors_per_file: Optional[float]
    mean_interevent_hours: Optional[float]
    burstiness: float
    age_hours: float
    lead_workload: float
    dominated: bool
    effective_team_size: float
    top_language_by_loc: Optional[str]
    top_language_by_files: Optional[str]

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_FIELDS}

    @classmethod
    def from_json(cls, obj: dict) -> "RepoMetrics":
        return cls(**{k: obj.get(k) for k in METRIC_FIELDS})


METRIC_FIELDS = [
    "repo_id",
    "files",
    "committers",
    "commits",
    "branches",
    "avg_message_length",
    "avg_editors_per_file",
    "mean_interevent_hours",
    "burstiness",
    "age_hours",
    "lead_workload",
    "dominated",
    "effective_team_size",
    "top_language_by_loc",
    "top_language_by_files",
]

# Numeric columns that feed distribution exports and two-sample comparisons.
NUMERIC_METRICS = [
    "files",
    "committers",
    "commits",
    "branches",
    "avg_message_length",
    "avg_editors_per_file",
    "mean_interevent_hours",
    "burstiness",
    "age_hours",
    "lead_workload",
    "effective_team_size",
]


def effective_team_size(dist: WorkDistribution) -> float:
    """Exponentiated Shannon entropy of the commit-fraction distribution.

    Equals the contributor count when everyone contributes equally and 1 for
    a single contributor: the number of equally contributing members the
    repository effectively has.
    """
    h = 0.0
    for f in dist.fractions.values():
        h -= f * math.log2(f)
    return 2.0**h


def lead_workload(dist: WorkDistribution) -> float:
    """Fraction of commits made by the heaviest contributor."""
    return max(dist.counts.values()) / dist.total


def is_dominated(dist: WorkDistribution) -> bool:
    """True when the lead made strictly more commits than everyone else combined.

    A single contributor trivially dominates; an exactly equal two-way split
    does not dominate.
    """
    lead = max(dist.counts.values())
    return lead > dist.total - lead


def repo_age(history: list[CommitMeta]) -> float:
    """Hours between the first and most recent commit; 0 for one commit."""
    if not history:
        raise ValueError("history must be non-empty")
    return (history[-1].author_time - history[0].author_time) / SECONDS_PER_HOUR


def mean_interevent(history: list[CommitMeta]) -> Optional[float]:
    """Mean gap between successive commits in hours; None below two commits.

    The mean of successive gaps telescopes to (last - first)/(n - 1), which
    keeps the identity mean * (n - 1) == age exact.
    """
    n = len(history)
    if n < 2:
        return None
    return repo_age(history) / (n - 1)


def dispersion_index(counts: list[int]) -> float:
    """Population variance over mean of a count series (the Fano factor)."""
    if not counts:
        raise ValueError("count series must be non-empty")
    n = len(counts)
    mean = sum(counts) / n
    if mean == 0.0:
        return 0.0
    variance = sum((c - mean) ** 2 for c in counts) / n
    return variance / mean


def daily_series(history: list[CommitMeta]) -> BurstinessSeries:
    """Commits per UTC calendar day from first to last commit, zeros kept."""
    if not history:
        raise ValueError("history must be non-empty")
    days = [c.author_time // SECONDS_PER_DAY for c in history]
    first, last = days[0], days[-1]
    counts = [0] * (last - first + 1)
    for d in days:
        counts[d - first] += 1
    n_days = len(counts)
    mean = len(history) / n_days
    variance = sum((c - mean) ** 2 for c in counts) / n_days
    return BurstinessSeries(window="day", daily_counts=counts, mean=mean, variance=variance)


def burstiness(history: list[CommitMeta]) -> float:
    """Index of dispersion (variance over mean) of daily commit counts.

    Defined as 0 for single-commit repositories; 0 for perfectly regular
    series; above 1 for bursty ones.
    """
    if len(history) < 2:
        return 0.0
    return dispersion_index(daily_series(history).daily_counts)


def editors_per_file(
    history: list[CommitMeta], head_paths: list[str] | tuple[str, ...]
) -> Optional[float]:
    """Mean number of distinct authors that touched each current file.

    Restricted to paths present at the head (renamed or deleted files are
    ambiguous); head paths never touched in the extracted history are left
    out of the mean. None when no head path was ever touched.
    """
    head = set(head_paths)
    editors: dict[str, set[str]] = {}
    for commit in history:
        for path in commit.changed_paths:
            if path in head:
                editors.setdefault(path, set()).add(commit.author_email)
    if not editors:
        return None
    total = sum(len(editors[p]) for p in sorted(editors))
    return total / len(editors)


# Extension table in the style of line-count tools: recognize-or-skip.
# Each entry: language name -> (extensions, line-comment prefixes).
LANGUAGES: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "Assembly": ((".asm", ".s"), (";", "#")),
    "Bourne Again Shell": ((".bash",), ("#",)),
    "Bourne Shell": ((".sh",), ("#",)),
    "C": ((".c",), ("//",)),
    "C#": ((".cs",), ("//",)),
    "C++": ((".cpp", ".cc", ".cxx"), ("//",)),
    "C/C++ Header": ((".h", ".hpp", ".hh", ".hxx"), ("//",)),
    "CMake": ((".cmake",), ("#",)),
    "CSS": ((".css",), ()),
    "Clojure": ((".clj", ".cljs"), (";",)),
    "D": ((".d",), ("//",)),
    "Dart": ((".dart",), ("//",)),
    "Elixir": ((".ex", ".exs"), ("#",)),
    "Erlang": ((".erl", ".hrl"), ("%",)),
    "F#": ((".fs", ".fsi"), ("//",)),
    "Fortran": ((".f", ".f90", ".f95", ".f03"), ("!",)),
    "Go": ((".go",), ("//",)),
    "Groovy": ((".groovy",), ("//",)),
    "HTML": ((".html", ".htm"), ()),
    "Haskell": ((".hs", ".lhs"), ("--",)),
    "JSON": ((".json",), ()),
    "Java": ((".java",), ("//",)),
    "JavaScript": ((".js", ".jsx", ".mjs", ".cjs"), ("//",)),
    "Julia": ((".jl",), ("#",)),
    "Jupyter Notebook": ((".ipynb",), ()),
    "Kotlin": ((".kt", ".kts"), ("//",)),
    "LESS": ((".less",), ("//",)),
    "Lua": ((".lua",), ("--",)),
    "MATLAB": ((".m",), ("%",)),
    "Markdown": ((".md", ".markdown"), ()),
    "OCaml": ((".ml", ".mli"), ()),
    "Objective C++": ((".mm",), ("//",)),
    "PHP": ((".php",), ("//", "#")),
    "Pascal": ((".pas", ".pp"), ("//",)),
    "Perl": ((".pl", ".pm"), ("#",)),
    "Python": ((".py", ".pyw"), ("#",)),
    "R": ((".r", ".rnw"), ("#",)),
    "Ruby": ((".rb", ".rake"), ("#",)),
    "Rust": ((".rs",), ("//",)),
    "SASS": ((".scss", ".sass"), ("//",)),
    "SQL": ((".sql",), ("--",)),
    "Scala": ((".scala",), ("//",)),
    "Swift": ((".swift",), ("//",)),
    "TOML": ((".toml",), ("#",)),
    "TeX": ((".tex", ".sty", ".cls"), ("%",)),
    "TypeScript": ((".ts", ".tsx"), ("//",)),
    "VHDL": ((".vhd", ".vhdl"), ("--",)),
    "Verilog": ((".v", ".sv"), ("//",)),
    "Visual Basic": ((".vb",), ("'",)),
    "Vuejs Component": ((".vue",), ()),
    "XML": ((".xml", ".xsd", ".xsl"), ()),
    "YAML": ((".yaml", ".yml"), ("#",)),
    "Zig": ((".zig",), ("//",)),
    "reStructuredText": ((".rst",), ()),
    "zsh": ((".zsh",), ("#",)),
}

_EXTENSION_INDEX: dict[str, tuple[str, tuple[str, ...]]] = {}
for _name, (_exts, _prefixes) in LANGUAGES.items():
    for _ext in _exts:
        _EXTENSION_INDEX[_ext] = (_name, _prefixes)


def classify_extension(path: str) -> Optional[tuple[str, tuple[str, ...]]]:
    suffix = Path(path).suffix.lower()
    return _EXTENSION_INDEX.get(suffix)


def count_loc(text: str, comment_prefixes: tuple[str, ...]) -> int:
    """Non-blank lines that are not pure line comments."""
    loc = 0
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if any(stripped.startswith(p) for p in comment_prefixes):
            continue
        loc += 1
    return loc


def looks_binary(blob: bytes) -> bool:
    return b"\0" in blob[:8192]


def tally_languages(
    repo: str | Path,
    main: str,
    head_paths: list[str] | tuple[str, ...],
    blob_reader: Optional[Callable[[str], Optional[bytes]]] = None,
) -> LanguageTally:
    """Tally files and lines of code per recognized language at the head.

    Unrecognized extensions are skipped entirely; binary blobs are skipped;
    unreadable blobs are skipped with an annotation.
    """
    if blob_reader is None:
        blob_reader = lambda path: read_blob(repo, main, path)
    tally = LanguageTally()
    for path in head_paths:
        classified = classify_extension(path)
        if classified is None:
            continue
        language, prefixes = classified
        blob = blob_reader(path)
        if blob is None:
            tally.annotations.append(f"unreadable blob: {path}")
            continue
        if looks_binary(blob):
            continue
        tally.add(language, count_loc(blob.decode("utf-8", errors="replace"), prefixes))
    return tally


def top_language(tally: LanguageTally, by: str = "loc") -> Optional[str]:
    """Language with the largest tally under ``by``; ties break alphabetically."""
    if by not in ("loc", "files"):
        raise ValueError("by must be 'loc' or 'files'")
    if not tally.per_language:
        return None
    best = max(sorted(tally.per_language), key=lambda lang: (tally.per_language[lang][by],))
    # max() keeps the first of equals; sorting first makes that the
    # lexicographically smallest.
    return best


def compute_repo_metrics(
    history: list[CommitMeta],
    snapshot: RepoSnapshot,
    tally: LanguageTally,
) -> RepoMetrics:
    """Assemble the full per-repository statistic vector.

    Expects a non-empty, time-ordered history (empty repositories are
    filtered before extraction).
    """
    if not history:
        raise ValueError("cannot compute metrics for an empty history")
    dist = WorkDistribution.from_history(history)
    return RepoMetrics(
        repo_id=snapshot.repo_id,
        files=len(snapshot.head_paths),
        committers=dist.contributor_count,
        commits=len(history),
        branches=snapshot.remote_branch_count,
        avg_message_length=sum(c.message_length for c in history) / len(history),
        avg_editors_per_file=editors_per_file(history, snapshot.head_paths),
        mean_interevent_hours=mean_interevent(history),
        burstiness=burstiness(history),
        age_hours=repo_age(history),
        lead_workload=lead_workload(dist),
        dominated=is_dominated(dist),
        effective_team_size=effective_team_size(dist),
        top_language_by_loc=top_language(tally, "loc"),
        top_language_by_files=top_language(tally, "files"),
    )

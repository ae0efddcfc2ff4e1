"""forgemine: discover self-hosted git forges, mine their public
repositories, and statistically compare repository populations."""

from .fingerprint import DEFAULT_RULES, FingerprintRule, ForgeKind, HostRecord, detect_forge
from .crawl import HostCrawlStatus, RepoRef, enumerate_repos
from .clone import CloneOutcome, CloneState, clone_repo
from .gitread import CommitMeta, RepoSnapshot, extract_history, resolve_main_branch
from .metrics import (
    RepoMetrics,
    WorkDistribution,
    burstiness,
    compute_repo_metrics,
    effective_team_size,
    is_dominated,
    lead_workload,
    mean_interevent,
    repo_age,
)
from .dedup import OverlapClass, OverlapReport, classify_overlap, intra_corpus_mirrors
from .hostlabel import DomainList, filter_fake_emails, is_academic_email, label_host
from .stats import (
    KsResult,
    LogisticFitResult,
    SummaryStats,
    build_design_matrix,
    ks_two_sample,
    logistic_fit,
    summarize,
)
from .pipeline import build_comparison_plan, ingest_comparison_corpus, run_all, run_stage

__version__ = "0.1.0"

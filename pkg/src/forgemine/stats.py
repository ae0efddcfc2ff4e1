"""Two-population statistical comparison.

Three layers: distribution summaries (mean/median/5th/95th percentiles),
two-sample Kolmogorov-Smirnov tests with asymptotic p-values, and a binary
logistic regression fitted by Newton-Raphson with step halving so the
deviance is non-increasing at every iteration. Standard errors come from the
inverse observed information; odds confidence intervals are Wald intervals
exponentiated; the pseudo-R2 is McFadden's 1 - LL/LL_null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import RankDeficientError, SeparationError

DEFAULT_FEATURES = [
    "files",
    "committers",
    "commits",
    "branches",
    "avg_message_length",
    "avg_editors_per_file",
    "mean_interevent_hours",
    "lead_workload",
    "effective_team_size",
    "burstiness",
]

BOURNE_MERGED = "Bourne (Again) Shell"
_BOURNE_VARIANTS = {"Bourne Shell", "Bourne Again Shell"}
OTHER_LANGUAGE = "OTHER"
DEFAULT_BASELINE_LANGUAGE = "JavaScript"


@dataclass
class SummaryStats:
    mean: float
    median: float
    p5: float
    p95: float
    n: int

    def to_json(self) -> dict:
        return {"mean": self.mean, "median": self.median, "p5": self.p5, "p95": self.p95, "n": self.n}


def summarize(values: Sequence[float]) -> SummaryStats:
    """Mean, median, and 5th/95th percentiles (linear interpolation)."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    p5, median, p95 = np.percentile(arr, [5.0, 50.0, 95.0])
    return SummaryStats(
        mean=float(arr.mean()), median=float(median), p5=float(p5), p95=float(p95), n=int(arr.size)
    )


@dataclass
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int

    def to_json(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value, "n1": self.n1, "n2": self.n2}


def kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov distribution.

    Q(x) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2), clamped to [0, 1].
    """
    if x <= 0:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 101):
        term = math.exp(-2.0 * (k * x) ** 2)
        total += sign * term
        if term < 1e-16:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KsResult:
    """Two-sample KS statistic and asymptotic p-value.

    D is the supremum ECDF difference; the p-value evaluates the Kolmogorov
    distribution at sqrt(n1*n2/(n1+n2)) * D, appropriate for the sample
    sizes this toolkit compares (thousands of repositories).
    """
    xs = np.sort(np.asarray(list(a), dtype=float))
    ys = np.sort(np.asarray(list(b), dtype=float))
    n1, n2 = xs.size, ys.size
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([xs, ys])
    cdf_a = np.searchsorted(xs, pooled, side="right") / n1
    cdf_b = np.searchsorted(ys, pooled, side="right") / n2
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    effective_n = n1 * n2 / (n1 + n2)
    p = kolmogorov_sf(math.sqrt(effective_n) * d)
    return KsResult(statistic=d, p_value=p, n1=n1, n2=n2)


@dataclass
class DesignMatrix:
    X: np.ndarray  # rows x feature columns, no intercept
    y: np.ndarray  # binary outcome, 1 = positive corpus
    columns: list[str]
    row_ids: list[str]
    language_labels: Optional[list[str]] = None  # grouped label per row


@dataclass
class DeletionCensus:
    n_input: int
    n_kept: int
    n_dropped: int
    dropped_by_field: dict[str, int]

    def to_json(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_kept": self.n_kept,
            "n_dropped": self.n_dropped,
            "dropped_by_field": dict(sorted(self.dropped_by_field.items())),
        }


def rows_from_metrics_csv(path, corpus: str) -> list[dict]:
    """Read a metrics CSV export back into labeled rows for model building.

    Numeric fields parse to floats, blanks to None; every row is tagged
    with the given corpus label.
    """
    import csv as _csv
    from pathlib import Path as _Path

    numeric = {
        "files", "committers", "commits", "branches", "avg_message_length",
        "avg_editors_per_file", "mean_interevent_hours", "burstiness",
        "age_hours", "lead_workload", "effective_team_size",
    }
    rows = []
    with _Path(path).open(newline="", encoding="utf-8") as fh:
        for record in _csv.DictReader(fh):
            row: dict = {"corpus": corpus}
            for key, value in record.items():
                if value == "" or value is None:
                    row[key] = None
                elif key in numeric:
                    row[key] = float(value)
                elif key == "dominated":
                    row[key] = value == "True"
                else:
                    row[key] = value
            rows.append(row)
    return rows


def build_design_matrix(
    rows: Iterable[dict],
    outcome_positive: str,
    include_language: bool = True,
    features: Sequence[str] = tuple(DEFAULT_FEATURES),
    rare_language_threshold: int = 1000,
    baseline_language: str = DEFAULT_BASELINE_LANGUAGE,
    language_field: str = "top_language_by_loc",
) -> tuple[DesignMatrix, DeletionCensus]:
    """Assemble the regression design matrix from labeled metric rows.

    Each row is a metrics record plus a ``corpus`` label; the outcome is 1
    for ``outcome_positive``. Rows missing any required field are dropped
    (listwise deletion) and censused. Language handling: Bourne variants are
    merged, languages below the rarity threshold are grouped into OTHER, and
    the remainder are dummy coded against the baseline language.
    """
    rows = list(rows)
    features = list(features)
    required = features + ([language_field] if include_language else [])

    kept: list[dict] = []
    dropped_by_field: dict[str, int] = {}
    for row in rows:
        missing = [f for f in required if row.get(f) is None]
        if missing:
            for f in missing:
                dropped_by_field[f] = dropped_by_field.get(f, 0) + 1
        else:
            kept.append(row)
    census = DeletionCensus(
        n_input=len(rows),
        n_kept=len(kept),
        n_dropped=len(rows) - len(kept),
        dropped_by_field=dropped_by_field,
    )

    corpora = {row["corpus"] for row in kept}
    if outcome_positive not in corpora or len(corpora) < 2:
        raise ValueError(
            f"need surviving rows from both corpora (have {sorted(corpora)}, "
            f"positive = {outcome_positive!r})"
        )

    language_labels: Optional[list[str]] = None
    language_columns: list[str] = []
    if include_language:
        merged = []
        for row in kept:
            label = row[language_field]
            merged.append(BOURNE_MERGED if label in _BOURNE_VARIANTS else label)
        counts: dict[str, int] = {}
        for label in merged:
            counts[label] = counts.get(label, 0) + 1
        keep_langs = {lang for lang, n in counts.items() if n >= rare_language_threshold}
        language_labels = [
            lang if lang in keep_langs else OTHER_LANGUAGE for lang in merged
        ]
        categories = sorted(set(language_labels) - {baseline_language})
        language_columns = [f"language={lang}" for lang in categories]

    columns = features + language_columns
    X = np.zeros((len(kept), len(columns)))
    y = np.zeros(len(kept))
    row_ids = []
    for i, row in enumerate(kept):
        for j, f in enumerate(features):
            X[i, j] = float(row[f])
        if include_language and language_labels is not None:
            label = language_labels[i]
            if label != baseline_language:
                X[i, len(features) + _lang_index(language_columns, label)] = 1.0
        y[i] = 1.0 if row["corpus"] == outcome_positive else 0.0
        row_ids.append(row.get("repo_id", str(i)))
    return (
        DesignMatrix(X=X, y=y, columns=columns, row_ids=row_ids, language_labels=language_labels),
        census,
    )


def _lang_index(language_columns: list[str], label: str) -> int:
    return language_columns.index(f"language={label}")


@dataclass
class CoefficientEstimate:
    name: str
    beta: float
    odds: float
    p_value: float
    odds_ci_low: float
    odds_ci_high: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "beta": self.beta,
            "odds": self.odds,
            "p_value": self.p_value,
            "odds_ci_low": self.odds_ci_low,
            "odds_ci_high": self.odds_ci_high,
        }


@dataclass
class LogisticFitResult:
    coefficients: list[CoefficientEstimate]
    deviance: float  # -2 log-likelihood at the optimum
    pseudo_r2: float  # McFadden
    iterations: int
    converged: bool
    n_rows: int
    deviance_trace: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "coefficients": [c.to_json() for c in self.coefficients],
            "deviance": self.deviance,
            "pseudo_r2": self.pseudo_r2,
            "iterations": self.iterations,
            "converged": self.converged,
            "n_rows": self.n_rows,
        }


def _log_likelihood(y: np.ndarray, eta: np.ndarray) -> float:
    # sum y*eta - log(1 + exp(eta)), stable via logaddexp
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _safe_exp(x: float) -> float:
    try:
        return float(math.exp(x))
    except OverflowError:
        return math.inf


def _check_rank(X: np.ndarray, names: list[str]) -> None:
    rank = np.linalg.matrix_rank(X)
    if rank >= X.shape[1]:
        return
    # Pivoted QR: the trailing pivots with negligible diagonal are the
    # columns that are linear combinations of the others.
    _, r, pivots = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(X.shape) * np.finfo(float).eps if diag.size else 0.0
    offending = [names[pivots[i]] for i in range(len(diag)) if diag[i] <= tol]
    offending += [names[p] for p in pivots[len(diag):]]
    raise RankDeficientError(sorted(offending))


def logistic_fit(
    design: DesignMatrix,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> LogisticFitResult:
    """Maximum-likelihood logistic regression via damped Newton-Raphson.

    An intercept is always included. Newton steps are halved until the
    log-likelihood does not decrease, which makes the deviance trace
    monotone. Perfect separation is reported explicitly (coefficients
    diverge); a singular information matrix raises a rank error naming the
    dependent columns.
    """
    X = np.column_stack([np.ones(len(design.y)), design.X])
    y = np.asarray(design.y, dtype=float)
    names = ["intercept"] + list(design.columns)
    if y.size == 0:
        raise ValueError("empty design matrix")
    if y.min() == y.max():
        raise ValueError("outcome is constant; nothing to fit")
    _check_rank(X, names)

    beta = np.zeros(X.shape[1])
    eta = X @ beta
    ll = _log_likelihood(y, eta)
    trace = [-2.0 * ll]
    converged = False
    iterations = 0
    info = None
    for iterations in range(1, max_iter + 1):
        p = 1.0 / (1.0 + np.exp(-eta))
        gradient = X.T @ (y - p)
        if float(np.max(np.abs(gradient))) < tol:
            converged = True
            iterations -= 1
            break
        w = p * (1.0 - p)
        info = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(info, gradient)
        except np.linalg.LinAlgError:
            raise SeparationError(
                "information matrix became singular; outcome is (quasi-)separable"
            ) from None
        # Accept a step unless it decreases the log-likelihood by more than
        # rounding noise; otherwise halve it. This keeps the deviance trace
        # monotone (up to float rounding) without stalling near the optimum.
        ll_slack = 1e-10 * (1.0 + abs(ll))
        scale = 1.0
        for _ in range(40):
            candidate = beta + scale * step
            cand_eta = X @ candidate
            cand_ll = _log_likelihood(y, cand_eta)
            if cand_ll >= ll - ll_slack:
                break
            scale *= 0.5
        else:
            if float(np.max(np.abs(gradient))) < 1e-4:
                converged = True  # float-limited optimum
                break
            raise SeparationError(
                "log-likelihood cannot improve along the Newton direction; "
                "data may be (quasi-)separable"
            )
        beta, eta, ll = candidate, cand_eta, cand_ll
        trace.append(-2.0 * ll)
        if float(np.max(np.abs(beta))) > 1e4:
            raise SeparationError(
                "coefficients diverging (|beta| > 1e4); outcome is separable"
            )

    if not converged:
        raise SeparationError(
            f"Newton-Raphson did not converge in {max_iter} iterations; "
            "data may be (quasi-)separable"
        )

    p = 1.0 / (1.0 + np.exp(-eta))
    if float(np.max(np.minimum(p, 1.0 - p))) < 1e-4:
        # Every observation fits essentially perfectly: the MLE lies at
        # infinity and the reported optimum is an artifact of the tolerance.
        raise SeparationError("all fitted probabilities saturated; outcome is separable")
    w = p * (1.0 - p)
    info = (X * w[:, None]).T @ X
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise SeparationError("information matrix singular at the optimum") from None
    se = np.sqrt(np.diag(cov))

    p_bar = float(y.mean())
    ll_null = y.size * (p_bar * math.log(p_bar) + (1.0 - p_bar) * math.log(1.0 - p_bar))
    pseudo_r2 = 1.0 - ll / ll_null if ll_null != 0 else 0.0

    coefficients = []
    for name, b, s in zip(names, beta, se):
        z = b / s if s > 0 else math.inf
        p_value = math.erfc(abs(z) / math.sqrt(2.0))
        coefficients.append(
            CoefficientEstimate(
                name=name,
                beta=float(b),
                odds=_safe_exp(b),
                p_value=float(p_value),
                odds_ci_low=_safe_exp(b - 1.96 * s),
                odds_ci_high=_safe_exp(b + 1.96 * s),
            )
        )
    return LogisticFitResult(
        coefficients=coefficients,
        deviance=-2.0 * ll,
        pseudo_r2=float(pseudo_r2),
        iterations=iterations,
        converged=converged,
        n_rows=int(y.size),
        deviance_trace=trace,
    )

"""Collaboration and temporal statistics against hand-computed values."""

from __future__ import annotations

import math
import random

import pytest

from forgemine.gitread import CommitMeta, RepoSnapshot, extract_history
from forgemine.metrics import (
    LanguageTally,
    WorkDistribution,
    burstiness,
    compute_repo_metrics,
    count_loc,
    daily_series,
    dispersion_index,
    editors_per_file,
    effective_team_size,
    is_dominated,
    lead_workload,
    mean_interevent,
    repo_age,
    tally_languages,
    top_language,
)
from repo_fixtures import T0, ORACLE_SHEET, RepoBuilder


def history_at_hours(hours: list[float], emails: list[str] | None = None) -> list[CommitMeta]:
    emails = emails or ["a@x.net"] * len(hours)
    return [
        CommitMeta(
            hash=f"{i:040x}",
            author_email=emails[i],
            author_time=T0 + int(h * 3600),
            message_length=1,
        )
        for i, h in enumerate(hours)
    ]


def oracle_team_size(counts: dict[str, int]) -> float:
    total = sum(counts.values())
    h = -sum((w / total) * math.log2(w / total) for _, w in sorted(counts.items()))
    return 2**h


class TestEffectiveTeamSize:
    def test_ten_to_one_duo(self):
        m = effective_team_size(WorkDistribution.from_counts({"a": 10, "b": 1}))
        assert m == pytest.approx(1.356, abs=1e-3)

    def test_equal_duo_exactly_two(self):
        assert effective_team_size(WorkDistribution.from_counts({"a": 5, "b": 5})) == 2.0

    def test_single_contributor(self):
        assert effective_team_size(WorkDistribution.from_counts({"a": 7})) == 1.0

    def test_matches_entropy_oracle_on_random_distributions(self):
        rng = random.Random(1234)
        for _ in range(1000):
            m_count = rng.randint(1, 12)
            counts = {f"u{i}@x.net": rng.randint(1, 500) for i in range(m_count)}
            dist = WorkDistribution.from_counts(counts)
            assert effective_team_size(dist) == pytest.approx(
                oracle_team_size(counts), abs=1e-9
            )

    def test_bounds_and_equality_condition(self):
        rng = random.Random(99)
        for _ in range(300):
            m_count = rng.randint(1, 9)
            counts = {f"u{i}": rng.randint(1, 50) for i in range(m_count)}
            dist = WorkDistribution.from_counts(counts)
            assert abs(sum(dist.fractions.values()) - 1.0) <= 1e-12
            m = effective_team_size(dist)
            assert 1.0 - 1e-9 <= m <= m_count + 1e-9
            if len(set(counts.values())) == 1:
                assert m == pytest.approx(m_count, abs=1e-9)
            elif m_count > 1:
                assert m < m_count - 1e-12 or len(set(counts.values())) == 1

    def test_scale_invariance(self):
        rng = random.Random(7)
        for _ in range(100):
            counts = {f"u{i}": rng.randint(1, 30) for i in range(rng.randint(1, 6))}
            scaled = {k: v * 13 for k, v in counts.items()}
            d1 = WorkDistribution.from_counts(counts)
            d2 = WorkDistribution.from_counts(scaled)
            assert effective_team_size(d1) == effective_team_size(d2)
            assert lead_workload(d1) == lead_workload(d2)
            assert is_dominated(d1) == is_dominated(d2)


class TestLeadAndDominance:
    def test_lead_examples(self):
        assert lead_workload(WorkDistribution.from_counts({"a": 3, "b": 1})) == 0.75
        assert lead_workload(WorkDistribution.from_counts({"a": 1})) == 1.0
        assert lead_workload(WorkDistribution.from_counts({"a": 4, "b": 4, "c": 2})) == 0.4

    def test_dominated_examples(self):
        assert is_dominated(WorkDistribution.from_counts({"a": 5, "b": 3, "c": 1})) is True
        assert is_dominated(WorkDistribution.from_counts({"a": 3, "b": 3})) is False
        assert is_dominated(WorkDistribution.from_counts({"a": 1})) is True

    def test_dominated_implies_majority_lead(self):
        rng = random.Random(5)
        for _ in range(300):
            counts = {f"u{i}": rng.randint(1, 20) for i in range(rng.randint(2, 8))}
            dist = WorkDistribution.from_counts(counts)
            if is_dominated(dist):
                assert lead_workload(dist) > 0.5

    def test_lead_at_least_one_over_m(self):
        rng = random.Random(6)
        for _ in range(200):
            counts = {f"u{i}": rng.randint(1, 20) for i in range(rng.randint(1, 8))}
            dist = WorkDistribution.from_counts(counts)
            assert lead_workload(dist) >= 1.0 / dist.contributor_count - 1e-15


class TestTemporal:
    def test_interevent_one_hour(self):
        assert mean_interevent(history_at_hours([0, 1, 2])) == 1.0

    def test_interevent_absent_for_single_commit(self):
        assert mean_interevent(history_at_hours([0])) is None

    def test_interevent_24h(self):
        assert mean_interevent(history_at_hours([0, 24])) == 24.0

    def test_age_examples(self):
        assert repo_age(history_at_hours([0, 1])) == 1.0
        assert repo_age(history_at_hours([0])) == 0.0
        assert repo_age(history_at_hours([0, 120, 240])) == 240.0

    def test_identity_mean_interevent_times_gaps_equals_age(self):
        fixtures = [
            [0, 1, 2, 24, 28, 50],  # oracle repo timeline
            [0, 12, 24],
            [0, 1, 2, 3, 24, 25, 48, 70],
            [0, 24],
            [0, 0, 0, 8],  # zero gaps included
            [0, 5, 10, 15, 20, 25, 30, 35],
        ]
        for hours in fixtures:
            history = history_at_hours(hours)
            n = len(history)
            assert mean_interevent(history) * (n - 1) == repo_age(history)

    def test_zero_gaps_included_in_mean(self):
        # Three commits at the same instant, one 9 hours later:
        # gaps are (0, 0, 9) -> mean 3.
        assert mean_interevent(history_at_hours([0, 0, 0, 9])) == 3.0


class TestBurstiness:
    def test_single_commit_is_zero(self):
        assert burstiness(history_at_hours([0])) == 0.0

    def test_constant_series_is_zero(self):
        hours = [0, 1, 24, 25, 48, 49, 72, 73]  # two commits every day
        assert burstiness(history_at_hours(hours)) == 0.0

    def test_dispersion_of_0_4_series(self):
        assert dispersion_index([0, 4]) == 2.0

    def test_two_two_two_two(self):
        assert dispersion_index([2, 2, 2, 2]) == 0.0

    def test_daily_bins_include_zero_days(self):
        series = daily_series(history_at_hours([0, 48]))
        assert series.daily_counts == [1, 0, 1]
        assert sum(series.daily_counts) == 2

    def test_oracle_timeline(self):
        series = daily_series(history_at_hours([0, 1, 2, 24, 28, 50]))
        assert series.daily_counts == [3, 2, 1]
        assert burstiness(history_at_hours([0, 1, 2, 24, 28, 50])) == ORACLE_SHEET["burstiness"]

    def test_poisson_series_dispersion_near_one(self):
        rng = random.Random(20210101)
        counts = [0] * 10_000
        history = []
        i = 0
        for day in range(10_000):
            k = _poisson(rng, 3.0)
            counts[day] = k
            for j in range(k):
                history.append(
                    CommitMeta(
                        hash=f"{i:040x}",
                        author_email="p@x.net",
                        author_time=T0 + day * 86400 + j,
                        message_length=1,
                    )
                )
                i += 1
        assert counts[0] > 0 and counts[-1] > 0  # series spans all 10k days
        assert 0.95 <= burstiness(history) <= 1.05


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth's method; lambda is small.
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


class TestEditorsPerFile:
    def test_single_file_single_author(self):
        history = [
            CommitMeta(hash="0" * 40, author_email="a@x.net", author_time=T0,
                       message_length=1, changed_paths=("f.txt",))
        ]
        assert editors_per_file(history, ["f.txt"]) == 1.0

    def test_mean_over_touched_head_files(self):
        history = [
            CommitMeta(hash="0" * 40, author_email="a@x.net", author_time=T0,
                       message_length=1, changed_paths=("x", "y")),
            CommitMeta(hash="1" * 40, author_email="b@x.net", author_time=T0 + 1,
                       message_length=1, changed_paths=("x",)),
        ]
        assert editors_per_file(history, ["x", "y"]) == 1.5

    def test_untouched_head_file_excluded(self):
        history = [
            CommitMeta(hash="0" * 40, author_email="a@x.net", author_time=T0,
                       message_length=1, changed_paths=("x",)),
        ]
        # "ghost" never appears in any changed_paths (extraction gap).
        assert editors_per_file(history, ["x", "ghost"]) == 1.0

    def test_no_touched_files_absent(self):
        history = [
            CommitMeta(hash="0" * 40, author_email="a@x.net", author_time=T0,
                       message_length=1, changed_paths=()),
        ]
        assert editors_per_file(history, ["x"]) is None


class TestLanguages:
    def test_count_loc_rules(self):
        text = "x = 1\n\n# comment\n   \ny = 2  # trailing\n"
        assert count_loc(text, ("#",)) == 2

    def test_blank_only_file_zero_loc(self):
        assert count_loc("\n\n  \n", ("#",)) == 0

    def test_polyglot_fixture_hand_counted(self, tmp_path):
        b = RepoBuilder(tmp_path / "poly")
        b.commit(
            "a",
            "a@x.net",
            0,
            "polyglot",
            {
                "code.py": "import os\n\n# a comment\nprint(os.name)\n",  # 2 loc
                "web.js": "let x = 1;\n// note\nconsole.log(x);\n",  # 2 loc
                "page.html": "<html>\n<body>hi</body>\n</html>\n",  # 3 loc
                "환경.xyz": "unrecognized extension\n",
            },
        )
        tally = tally_languages(b.path, "main", ["code.py", "web.js", "page.html", "환경.xyz"])
        assert tally.per_language == {
            "Python": {"files": 1, "loc": 2},
            "JavaScript": {"files": 1, "loc": 2},
            "HTML": {"files": 1, "loc": 3},
        }
        assert tally.total_files <= 4

    def test_binary_blob_skipped(self, tmp_path):
        b = RepoBuilder(tmp_path / "bin")
        (b.path / "blob.py").write_bytes(b"\x00\x01\x02binary")
        b.commit("a", "a@x.net", 0, "bin", {})
        tally = tally_languages(b.path, "main", ["blob.py"])
        assert tally.per_language == {}

    def test_top_language_by_loc_and_files(self):
        tally = LanguageTally(
            per_language={
                "Python": {"files": 1, "loc": 100},
                "JavaScript": {"files": 1, "loc": 50},
            }
        )
        assert top_language(tally, "loc") == "Python"

    def test_tie_breaks_lexicographically(self):
        tally = LanguageTally(
            per_language={"C++": {"files": 1, "loc": 10}, "C": {"files": 1, "loc": 10}}
        )
        assert top_language(tally, "loc") == "C"

    def test_empty_tally_absent(self):
        assert top_language(LanguageTally(), "loc") is None


class TestComputeRepoMetrics:
    def test_oracle_repository_full_vector(self, oracle_repo):
        history = extract_history(oracle_repo, "main")
        from forgemine.gitread import build_snapshot

        snapshot = build_snapshot(oracle_repo, "fixture/team/alpha", history)
        tally = tally_languages(oracle_repo, "main", snapshot.head_paths)
        metrics = compute_repo_metrics(history, snapshot, tally)
        for field, expected in ORACLE_SHEET.items():
            if expected is None:
                continue
            assert getattr(metrics, field) == expected, field
        # Exponentiated entropy of {alice: 4, bob: 2}, frozen from the
        # independent oracle (see oracle_team_size).
        assert metrics.effective_team_size == oracle_team_size({"alice": 4, "bob": 2})
        assert metrics.effective_team_size == 1.88988157484231

    def test_single_commit_composition(self):
        history = history_at_hours([0])
        snapshot = RepoSnapshot(
            repo_id="x",
            main_branch="main",
            head_paths=("f.py",),
            remote_branch_count=1,
            first_commit_hash=history[0].hash,
            last_commit_hash=history[0].hash,
            commit_count=1,
        )
        metrics = compute_repo_metrics(history, snapshot, LanguageTally())
        assert metrics.commits == 1
        assert metrics.burstiness == 0.0
        assert metrics.mean_interevent_hours is None
        assert metrics.effective_team_size == 1.0
        assert metrics.dominated is True

    def test_empty_history_rejected(self):
        snapshot = RepoSnapshot(
            repo_id="x",
            main_branch="main",
            head_paths=(),
            remote_branch_count=1,
            first_commit_hash="0" * 40,
            last_commit_hash="0" * 40,
            commit_count=1,
        )
        with pytest.raises(ValueError):
            compute_repo_metrics([], snapshot, LanguageTally())

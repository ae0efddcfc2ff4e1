#!/usr/bin/env python3
"""Walk through the collaboration metrics on a tiny synthetic history.

Shows how commit counts per contributor translate into lead workload,
dominance, and effective team size, and how daily commit counts translate
into the burstiness (index of dispersion) measure.
"""

from forgemine.metrics import (
    CommitMeta,
    WorkDistribution,
    burstiness,
    daily_series,
    effective_team_size,
    is_dominated,
    lead_workload,
    mean_interevent,
    repo_age,
)

T0 = 1609459200  # 2021-01-01T00:00:00Z


def commit(i, email, hours):
    return CommitMeta(
        hash=f"{i:040x}", author_email=email, author_time=T0 + int(hours * 3600), message_length=10
    )


def show(counts):
    dist = WorkDistribution.from_counts(counts)
    print(f"  commit counts  {counts}")
    print(f"  lead workload  {lead_workload(dist):.3f}")
    print(f"  dominated      {is_dominated(dist)}")
    print(f"  team size      {dist.contributor_count} raw -> "
          f"{effective_team_size(dist):.3f} effective")
    print()


print("Work distributions")
print("==================")
show({"ann@lab.example": 5, "ben@lab.example": 5})
show({"ann@lab.example": 10, "ben@lab.example": 1})  # the 1.356 duo
show({"ann@lab.example": 7})

print("Temporal texture")
print("================")
# A bursty project: three commits in one morning, silence, a late flurry.
bursty = [commit(i, "ann@lab.example", h) for i, h in enumerate([0, 1, 2, 96, 97, 98, 99])]
# A metronome: one commit a day.
steady = [commit(i, "ben@lab.example", 24 * i) for i in range(7)]

for name, history in (("bursty", bursty), ("steady", steady)):
    series = daily_series(history)
    print(f"  {name:7} daily counts {series.daily_counts}")
    print(f"          age {repo_age(history):.0f} h, "
          f"mean interevent {mean_interevent(history):.2f} h, "
          f"dispersion index {burstiness(history):.3f}")
print()
print("Dispersion above 1 marks bursty activity; 0 is perfectly regular.")

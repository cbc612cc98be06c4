"""
From records to daily keyword counts
====================================

Builds a small record collection in memory, removes retweets and repeated
texts, and counts matches per UTC day for the CY, ON and TW sub-classes.
"""

from datetime import date, datetime, timedelta, timezone

import numpy as np

from countcusum import DateRange, RawRecord, aggregate_daily, dedup_records
from countcusum.ingest import aggregate_any, reference_groups

rng = np.random.default_rng(0)
window = DateRange(date(2020, 1, 1), date(2020, 6, 7))
print("days in window:", window.days)

# Three topics with different daily volumes; "cyber bully" doubles after
# the end of March.
phrases = {"cyber bully": (30, 60), "online harassment": (12, 12), "Twitter victim": (8, 8)}
records = []
for d in range(window.days):
    day = window.start + timedelta(days=d)
    for phrase, (before, after) in phrases.items():
        lam = before if day <= date(2020, 3, 29) else after
        for _ in range(rng.poisson(lam)):
            ts = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
            ts += timedelta(seconds=int(rng.integers(86400)))
            records.append(RawRecord(str(len(records)), ts, f"#{len(records)} {phrase}"))

# A retweet and a case/whitespace variant of an existing text are dropped.
records.append(RawRecord("rt", records[0].timestamp, "RT @someone " + records[0].text))
records.append(RawRecord("dup", records[1].timestamp, records[1].text.upper().replace(" ", "   ")))
kept = dedup_records(records)
print(f"{len(records)} records, {len(kept)} after dedup")

groups = reference_groups()
for g in groups:
    s = aggregate_daily(kept, g, window)
    weekly = s.counts[: 22 * 7].reshape(22, 7).sum(axis=1)
    print(f"{g.name}: total {s.total:6d}  weekly sums {weekly[:6]} ... {weekly[-4:]}")

total = aggregate_any(kept, groups, window)
print("total series length:", len(total), "sum:", total.total)

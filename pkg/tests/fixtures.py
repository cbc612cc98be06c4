"""Synthetic record files shaped like the reference collection."""

import json
from datetime import date, datetime, timedelta, timezone

import numpy as np

START = date(2020, 1, 1)
END = date(2020, 6, 7)


def step_records(
    phrases,
    last_pre_change: date,
    pre_mean: float,
    post_mean: float,
    seed: int,
    start: date = START,
    end: date = END,
    tag: str = "",
):
    """Poisson daily volumes with a mean step after ``last_pre_change``.

    Every record text is unique so deduplication keeps all of them.
    """
    rng = np.random.default_rng(seed)
    out = []
    day = start
    n = 0
    while day <= end:
        lam = pre_mean if day <= last_pre_change else post_mean
        for _ in range(rng.poisson(lam)):
            secs = int(rng.integers(0, 86400))
            ts = datetime(day.year, day.month, day.day, tzinfo=timezone.utc) + timedelta(seconds=secs)
            phrase = phrases[int(rng.integers(len(phrases)))]
            out.append(
                {
                    "id": f"{tag}{n}",
                    "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
                    "text": f"post {tag}{n}: {phrase} is a problem",
                }
            )
            n += 1
        day += timedelta(days=1)
    return out


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")

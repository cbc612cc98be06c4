"""Tabular summaries of changepoint results.

Rows read ``name | #tweets | changepoint`` with day-month dates such as
``29th March``; the structured rows also carry the ISO date.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Iterable

from .changepoint import ChangepointResult

HEADER = ("Name", "#tweets", "Changepoint")


def _ordinal(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def format_day(day: date) -> str:
    """``date(2020, 3, 29)`` -> ``"29th March"``."""
    return f"{_ordinal(day.day)} {day.strftime('%B')}"


def _format_total(total) -> str:
    if float(total).is_integer():
        return f"{int(total):,}"
    return f"{total:,.2f}"


@dataclass(frozen=True)
class Report:
    rows: list[dict]

    def lines(self) -> list[str]:
        out = [" | ".join(HEADER)]
        for row in self.rows:
            out.append(f"{row['name']} | {row['tweets_display']} | {row['changepoint_display']}")
        return out

    @property
    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def __str__(self) -> str:
        return self.text


def _row(label, total, tau_hat, day, significant, p_value) -> dict:
    return {
        "name": label,
        "tweets": total,
        "tweets_display": _format_total(total),
        "tau_hat": tau_hat,
        "changepoint_iso": day.isoformat(),
        "changepoint_human": format_day(day),
        "changepoint_display": format_day(day) if significant else "not significant",
        "significant": significant,
        "p_value": p_value,
    }


def render_report(results: Iterable[tuple[str, float, ChangepointResult]]) -> Report:
    """Build a report from ``(label, total_tweets, result)`` triples.

    Non-significant results render as ``not significant``; their estimated
    date is still kept in the structured row.
    """
    rows = []
    for label, total, res in results:
        day = res.tau_date
        if day is None:
            raise ValueError(f"result {label!r} has no start date to resolve")
        rows.append(_row(label, total, res.tau_hat, day, res.significant, res.p_value))
    return Report(rows)


def report_from_records(records: Iterable[dict]) -> Report:
    """Same as :func:`render_report` but from serialised result records."""
    rows = []
    for rec in records:
        if rec.get("error"):
            continue
        day = date.fromisoformat(rec["tau_date"])
        rows.append(
            _row(rec["label"], rec["total"], rec["tau_hat"], day, rec["significant"], rec["p_value"])
        )
    return Report(rows)

"""Record parsing, deduplication, keyword matching and daily aggregation.

Records are tweet-like items ``(id, timestamp, text)``. Timestamps carry a
UTC offset and are normalised to UTC; a record's day is its UTC calendar
date. Matching is a case-insensitive substring test after collapsing runs of
whitespace, so ``"online   abuse"`` matches the phrase ``"online abuse"`` but
``"cyber-bully"`` does not match ``"cyber bully"``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ConfigError, ParseError

FORMATS = ("json-lines", "csv")
RETWEET_MARKER = "rt @"

#: Search phrases grouped into the three sub-classes used for the reference
#: analysis.  "FB" and "Insta" are literal spellings, not aliases.
CY_PHRASES = (
    "cyberbullying",
    "cyber bully",
    "cyber bullies",
    "stop cyberbullying",
    "FB cyberbullying",
    "Facebook cyberbullying",
    "Insta cyberbullying",
)
ON_PHRASES = (
    "internet bullying",
    "Internet bully",
    "Internet bullies",
    "online abuse",
    "online harassment",
    "online shaming",
    "online stalking",
)
TW_PHRASES = (
    "Twitter bullying",
    "Twitter cyberbullying",
    "Twitter harassment",
    "Twitter victim",
)
#: All 28 collection phrases, in collection order.
ALL_PHRASES = (
    "Internet bullying",
    "Internet bully",
    "Internet bullies",
    "online abuse",
    "online harassment",
    "online shaming",
    "online stalking",
    "cyberbullying",
    "social media bullying",
    "stop cyberbullying",
    "cyber bully",
    "cyber bullies",
    "FB bullying",
    "FB cyberbullying",
    "FB harassment",
    "FB victim",
    "Facebook bullying",
    "Facebook cyberbullying",
    "Facebook victim",
    "Facebook harassment",
    "Twitter bullying",
    "Twitter cyberbullying",
    "Twitter harassment",
    "Twitter victim",
    "Insta bullying",
    "Insta cyberbullying",
    "Insta harassment",
    "Insta victim",
)

REFERENCE_START = date(2020, 1, 1)
REFERENCE_END = date(2020, 6, 7)


def collapse_ws(text: str) -> str:
    """Case-fold ``text`` and collapse whitespace runs to single spaces."""
    return " ".join(text.casefold().split())


@dataclass(frozen=True)
class RawRecord:
    id: str
    timestamp: datetime
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if self.timestamp.tzinfo is None:
            raise ValueError("record timestamp must be timezone-aware")

    @property
    def day(self) -> date:
        return self.timestamp.astimezone(timezone.utc).date()


@dataclass(frozen=True)
class KeywordGroup:
    """A named set of match phrases, e.g. one sub-class or a single keyword."""

    name: str
    phrases: tuple[str, ...]

    def __post_init__(self):
        phrases = tuple(self.phrases)
        object.__setattr__(self, "phrases", phrases)
        if not self.name:
            raise ConfigError("keyword group name must be non-empty")
        if not phrases:
            raise ConfigError(f"keyword group {self.name!r} has no phrases")
        seen = set()
        for p in phrases:
            key = collapse_ws(p)
            if not key:
                raise ConfigError(f"keyword group {self.name!r} has an empty phrase")
            if key in seen:
                raise ConfigError(f"keyword group {self.name!r} repeats phrase {p!r}")
            seen.add(key)

    @classmethod
    def single(cls, phrase: str) -> "KeywordGroup":
        return cls(phrase, (phrase,))


def reference_groups() -> list[KeywordGroup]:
    """The CY, ON and TW sub-classes."""
    return [
        KeywordGroup("CY", CY_PHRASES),
        KeywordGroup("ON", ON_PHRASES),
        KeywordGroup("TW", TW_PHRASES),
    ]


def load_groups(path: str | Path) -> list[KeywordGroup]:
    """Read keyword groups from a YAML (or JSON) file.

    The file holds a list of mappings with ``name`` and ``phrases`` keys,
    optionally wrapped in a top-level ``groups`` key.  Scalars are read as
    plain strings, so a group named ``ON`` or ``NO`` stays a string.
    """
    import yaml

    try:
        raw = yaml.load(Path(path).read_text(encoding="utf-8"), Loader=yaml.BaseLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from exc
    if isinstance(raw, dict) and "groups" in raw:
        raw = raw["groups"]
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: expected a non-empty list of groups")
    groups = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "name" not in item or "phrases" not in item:
            raise ConfigError(f"{path}: group #{i} needs 'name' and 'phrases'")
        phrases = item["phrases"]
        if not isinstance(phrases, list) or not all(isinstance(p, str) for p in phrases):
            raise ConfigError(f"{path}: group #{i} phrases must be a list of strings")
        groups.append(KeywordGroup(str(item["name"]), tuple(phrases)))
    names = [g.name for g in groups]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: duplicate group names")
    return groups


@dataclass(frozen=True)
class DateRange:
    """Inclusive range of UTC calendar dates."""

    start: date
    end: date

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"date range start {self.start} is after end {self.end}")

    @property
    def days(self) -> int:
        return (self.end - self.start).days + 1

    def __contains__(self, day: date) -> bool:
        return self.start <= day <= self.end


@dataclass(frozen=True, eq=False)
class DailySeries:
    """Contiguous per-day counts; ``counts[d]`` belongs to ``start + d``."""

    label: str
    start: date
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size < 1:
            raise ValueError("counts must be a non-empty 1-d sequence")
        if counts.dtype.kind == "f":
            if not np.all(np.isfinite(counts)) or np.any(counts != np.round(counts)):
                raise ValueError("counts must be integers")
        elif counts.dtype.kind not in "iu":
            raise ValueError(f"counts must be integers, got dtype {counts.dtype}")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return self.counts.size

    def __array__(self, dtype=None, copy=None):
        return self.counts if dtype is None else self.counts.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DailySeries):
            return NotImplemented
        return (
            self.label == other.label
            and self.start == other.start
            and np.array_equal(self.counts, other.counts)
        )

    @property
    def end(self) -> date:
        return self.start + timedelta(days=len(self) - 1)

    @property
    def dates(self) -> list[date]:
        return [self.start + timedelta(days=d) for d in range(len(self))]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp and convert it to UTC."""
    s = value.strip()
    if s[-1:] in ("Z", "z"):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return ts.astimezone(timezone.utc)


def _make_record(obj: dict, line: int) -> RawRecord:
    for key in ("id", "timestamp", "text"):
        if key not in obj or obj[key] is None:
            raise ParseError(line, f"missing field {key!r}")
    rid = obj["id"]
    if isinstance(rid, bool) or not isinstance(rid, (str, int)):
        raise ParseError(line, "field 'id' must be a string")
    rid = str(rid)
    if not rid:
        raise ParseError(line, "field 'id' is empty")
    if not isinstance(obj["timestamp"], str):
        raise ParseError(line, "field 'timestamp' must be a string")
    if not isinstance(obj["text"], str):
        raise ParseError(line, "field 'text' must be a string")
    try:
        ts = parse_timestamp(obj["timestamp"])
    except ValueError as exc:
        raise ParseError(line, f"bad timestamp: {exc}") from None
    return RawRecord(rid, ts, obj["text"])


def _as_text(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, str):
        return io.StringIO(source, newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_records(source, format: str) -> list[RawRecord]:
    """Parse records from a byte stream (or bytes/str) in file order.

    Parameters
    ----------
    source : binary file object, bytes or str
        Record data.
    format : {"json-lines", "csv"}
        ``json-lines``: one JSON object per line with ``id``, ``timestamp``,
        ``text``; blank lines are skipped.  ``csv``: header ``id,timestamp,text``
        with RFC 4180 quoting.

    Raises
    ------
    ConfigError
        Unknown ``format``.
    ParseError
        A malformed line; carries the 1-based line number.
    """
    if format not in FORMATS:
        raise ConfigError(f"unknown record format {format!r}; expected one of {FORMATS}")
    stream = _as_text(source)
    records = []
    if format == "json-lines":
        for lineno, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(lineno, "expected a JSON object")
            records.append(_make_record(obj, lineno))
        return records

    reader = csv.reader(stream)
    try:
        header = next(reader, None)
    except csv.Error as exc:
        raise ParseError(1, f"invalid CSV: {exc}") from None
    if header is None:
        return records
    header = [h.strip() for h in header]
    missing = {"id", "timestamp", "text"} - set(header)
    if missing:
        raise ParseError(1, f"header lacks column(s) {sorted(missing)}")
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise ParseError(reader.line_num, f"invalid CSV: {exc}") from None
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(
                reader.line_num, f"expected {len(header)} fields, got {len(row)}"
            )
        records.append(_make_record(dict(zip(header, row)), reader.line_num))
    return records


def format_for_path(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        return "json-lines"
    if suffix == ".csv":
        return "csv"
    raise ConfigError(f"cannot infer record format from {str(path)!r}")


def read_records(path: str | Path, format: str | None = None) -> list[RawRecord]:
    fmt = format or format_for_path(path)
    with open(path, "rb") as fh:
        return parse_records(fh, fmt)


def dedup_records(records: Iterable[RawRecord]) -> list[RawRecord]:
    """Drop retweets and repeated texts, keeping first occurrences in order.

    Two records are duplicates when their case-folded, whitespace-collapsed
    texts are equal.  A record is a retweet when that normalised text starts
    with ``"rt @"``.
    """
    seen = set()
    kept = []
    for rec in records:
        key = collapse_ws(rec.text)
        if key.startswith(RETWEET_MARKER) or key in seen:
            continue
        seen.add(key)
        kept.append(rec)
    return kept


def match_record(record: RawRecord, group: KeywordGroup) -> bool:
    text = collapse_ws(record.text)
    return any(collapse_ws(p) in text for p in group.phrases)


def aggregate_daily(
    records: Iterable[RawRecord], group: KeywordGroup, range: DateRange
) -> DailySeries:
    """Count matching records per UTC day over ``range``.

    Records outside the range are ignored and days without matches are
    explicit zeros, so the result always has ``range.days`` entries.
    """
    counts = np.zeros(range.days, dtype=np.int64)
    phrases = [collapse_ws(p) for p in group.phrases]
    for rec in records:
        day = rec.day
        if day not in range:
            continue
        text = collapse_ws(rec.text)
        if any(p in text for p in phrases):
            counts[(day - range.start).days] += 1
    return DailySeries(group.name, range.start, counts)


def aggregate_any(
    records: Iterable[RawRecord],
    groups: Sequence[KeywordGroup],
    range: DateRange,
    label: str = "total",
) -> DailySeries:
    """Daily count of records matching at least one of ``groups``."""
    union = KeywordGroup(
        label,
        tuple({collapse_ws(p): p for g in groups for p in g.phrases}.values()),
    )
    return aggregate_daily(records, union, range)


def write_series_csv(series: DailySeries, path: str | Path) -> None:
    """Write ``date,count`` rows, one per day."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "count"])
        for day, c in zip(series.dates, series.counts):
            w.writerow([day.isoformat(), int(c)])


def read_series_csv(path: str | Path, label: str | None = None) -> DailySeries:
    """Read a ``date,count`` file back into a series labelled by file stem.

    Raises ``ValueError`` when the header is wrong, a count is not a
    non-negative integer, or the dates are not consecutive.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["date", "count"]:
        raise ValueError(f"{path}: expected header 'date,count'")
    days, counts = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 fields")
        try:
            days.append(date.fromisoformat(row[0].strip()))
            counts.append(int(row[1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not days:
        raise ValueError(f"{path}: no data rows")
    for prev, cur in zip(days, days[1:]):
        if (cur - prev).days != 1:
            raise ValueError(f"{path}: dates not contiguous at {cur}")
    return DailySeries(label or path.stem, days[0], np.array(counts, dtype=np.int64))

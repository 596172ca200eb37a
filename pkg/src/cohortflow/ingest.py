"""Parse tweet-like records, extract interaction edges, and filter by frame.

Input is line-delimited JSON (one object per line with keys ``id``, ``user``,
``created_at``, ``text``) or a delimited table with the same columns and a
header row.  Every non-blank input line becomes exactly one record or one
error entry, so counts always reconcile.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import MalformedRecord, MissingField

logger = logging.getLogger(__name__)

USERNAME_RE = re.compile(r"[a-z0-9_]{1,15}")

# A handle is @ followed by a run of word characters.  The lookbehind keeps
# email-like "x@y" from counting; runs longer than 15 chars are not handles.
HANDLE_RE = re.compile(r"(?<![A-Za-z0-9_@])@([A-Za-z0-9_]+)")
RETWEET_PREFIX_RE = re.compile(r"^\s*rt\s+@", re.IGNORECASE)
VIA_BEFORE_RE = re.compile(r"\bvia\s+$", re.IGNORECASE)
HASHTAG_RE = re.compile(r"#(\w+)")

MAX_TEXT_BYTES = 560

RETWEET = "retweet"
MENTION = "mention"
VIA = "via"
INTERACTION_KINDS = (RETWEET, MENTION, VIA)


@dataclass(frozen=True)
class RawRecord:
    """One parsed message: normalized author, UTC timestamp, raw text."""

    id: str
    author: str
    timestamp: datetime
    text: str


@dataclass(frozen=True)
class Interaction:
    """A directed author-to-target relation extracted from one record."""

    source: str
    target: str
    kind: str
    record_id: str
    timestamp: datetime


@dataclass(frozen=True)
class FramePattern:
    """A named discourse frame with its matchers.

    Each matcher is either ``("hashtag_substring", value)`` -- fires when the
    value appears inside any ``#...`` token -- or ``("phrase", value)`` --
    fires on a case-insensitive whole-phrase occurrence in the text.
    Matcher values are stored lowercase.
    """

    label: str
    patterns: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.patterns:
            raise ValueError(f"frame {self.label!r} needs at least one pattern")
        for kind, value in self.patterns:
            if kind not in ("hashtag_substring", "phrase"):
                raise ValueError(f"unknown matcher kind {kind!r}")
            if value != value.lower():
                raise ValueError(f"matcher value {value!r} must be lowercase")


@dataclass(frozen=True)
class DatasetStats:
    """The four headline counts of a frame-filtered dataset."""

    total_tweets: int
    retweet_tweets: int
    mention_tweets: int
    unique_users: int


@dataclass
class ParseReport:
    """Outcome of parsing a whole input: records plus per-line error reports.

    ``lines == len(records) + len(errors)`` for every input (blank lines and
    the header row of delimited input are not counted).
    """

    records: list[RawRecord] = field(default_factory=list)
    errors: list[MalformedRecord] = field(default_factory=list)
    lines: int = 0


def normalize_username(raw: str) -> str:
    """Lowercase a username and strip any leading ``@``.

    Raises ValueError if the result does not match ``[a-z0-9_]{1,15}``
    (non-ASCII handles are rejected; platform usernames of the era are ASCII).
    """
    name = raw.strip().lstrip("@").lower()
    if not USERNAME_RE.fullmatch(name):
        raise ValueError(f"invalid username {raw!r}")
    return name


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 instant into an aware UTC datetime, second precision.

    Naive timestamps are taken as UTC; a trailing ``Z`` is accepted.
    """
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {raw!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def parse_record(obj: dict, line_no: int = 0) -> RawRecord:
    """Build a RawRecord from one decoded input object.

    Raises MissingField or MalformedRecord; never returns a partial record.
    """
    for key in ("id", "user", "created_at", "text"):
        if key not in obj or obj[key] is None:
            raise MissingField(key)
    record_id = str(obj["id"]).strip()
    if not record_id:
        raise MalformedRecord(line_no, "empty id")
    try:
        author = normalize_username(str(obj["user"]))
    except ValueError as exc:
        logger.warning("line %d: %s", line_no, exc)
        raise MalformedRecord(line_no, str(exc)) from exc
    try:
        timestamp = parse_timestamp(str(obj["created_at"]))
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from exc
    text = str(obj["text"])
    if len(text.encode("utf-8")) > MAX_TEXT_BYTES:
        raise MalformedRecord(line_no, f"text longer than {MAX_TEXT_BYTES} bytes")
    return RawRecord(id=record_id, author=author, timestamp=timestamp, text=text)


def parse_jsonl(text: str) -> ParseReport:
    """Parse line-delimited JSON records; blank lines are skipped."""
    report = ParseReport()
    seen_ids: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        report.lines += 1
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise MalformedRecord(line_no, "line is not an object")
            record = parse_record(obj, line_no)
            _check_unique(record, seen_ids, line_no)
        except json.JSONDecodeError as exc:
            report.errors.append(MalformedRecord(line_no, f"invalid JSON: {exc.msg}"))
        except MissingField as exc:
            report.errors.append(MalformedRecord(line_no, str(exc)))
        except MalformedRecord as exc:
            report.errors.append(exc)
        else:
            report.records.append(record)
    return report


def parse_delimited(text: str, delimiter: str | None = None) -> ParseReport:
    """Parse the tabular variant: header row required, same columns as JSONL.

    The delimiter is sniffed from the header when not given (comma, tab,
    semicolon, or pipe).
    """
    report = ParseReport()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        return report
    if delimiter is None:
        try:
            delimiter = csv.Sniffer().sniff(lines[0], delimiters=",\t;|").delimiter
        except csv.Error:
            delimiter = ","
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    if reader.fieldnames is None:
        return report
    header = [name.strip() for name in reader.fieldnames]
    missing = [k for k in ("id", "user", "created_at", "text") if k not in header]
    if missing:
        raise MissingField(missing[0])
    seen_ids: set[str] = set()
    for row in reader:
        line_no = reader.line_num
        if row is None or all(v is None or not str(v).strip() for v in row.values()):
            continue
        report.lines += 1
        clean = {k.strip(): v for k, v in row.items() if k is not None}
        try:
            record = parse_record(clean, line_no)
            _check_unique(record, seen_ids, line_no)
        except (MissingField, MalformedRecord) as exc:
            if isinstance(exc, MissingField):
                exc = MalformedRecord(line_no, str(exc))
            report.errors.append(exc)
        else:
            report.records.append(record)
    return report


def _check_unique(record: RawRecord, seen_ids: set[str], line_no: int) -> None:
    if record.id in seen_ids:
        raise MalformedRecord(line_no, f"duplicate id {record.id!r}")
    seen_ids.add(record.id)


def parse_dataset(text: str, fmt: str = "auto") -> ParseReport:
    """Parse a whole dataset from text in the given format.

    ``fmt`` is ``jsonl``, ``csv``, or ``auto`` (JSONL when the first
    non-blank line starts with ``{``, otherwise delimited).
    """
    if fmt == "auto":
        stripped = next((ln for ln in text.splitlines() if ln.strip()), "")
        fmt = "jsonl" if stripped.lstrip().startswith("{") else "csv"
    if fmt == "jsonl":
        return parse_jsonl(text)
    if fmt == "csv":
        return parse_delimited(text)
    raise ValueError(f"unknown dataset format {fmt!r}")


def extract_interactions(record: RawRecord) -> list[Interaction]:
    """Extract retweet/mention/via interactions from a record's text.

    A leading ``RT @name`` (case-insensitive RT) yields one retweet; every
    other handle is a mention unless immediately preceded by the token
    ``via``.  Self-targets are dropped and (target, kind) pairs are
    deduplicated within the record.
    """
    text = record.text
    interactions: list[Interaction] = []
    seen: set[tuple[str, str]] = set()
    retweet_prefix = RETWEET_PREFIX_RE.match(text)
    consumed_first_handle = False

    for match in HANDLE_RE.finditer(text):
        handle = match.group(1).lower()
        if not USERNAME_RE.fullmatch(handle):
            continue
        if retweet_prefix and not consumed_first_handle and match.start(1) - 1 == retweet_prefix.end() - 1:
            consumed_first_handle = True
            kind = RETWEET
        elif VIA_BEFORE_RE.search(text, 0, match.start()):
            kind = VIA
        else:
            kind = MENTION
        if handle == record.author:
            continue
        if (handle, kind) in seen:
            continue
        seen.add((handle, kind))
        interactions.append(
            Interaction(
                source=record.author,
                target=handle,
                kind=kind,
                record_id=record.id,
                timestamp=record.timestamp,
            )
        )
    return interactions


def match_frame(record: RawRecord, frame: FramePattern) -> bool:
    """True iff any of the frame's matchers fires on the record text."""
    lowered = record.text.lower()
    hashtags: list[str] | None = None
    for kind, value in frame.patterns:
        if kind == "hashtag_substring":
            if hashtags is None:
                hashtags = [m.group(1) for m in HASHTAG_RE.finditer(lowered)]
            if any(value in tag for tag in hashtags):
                return True
        else:  # phrase
            if re.search(r"\b" + re.escape(value) + r"\b", lowered):
                return True
    return False


def filter_frame(records: list[RawRecord], frame: FramePattern) -> list[RawRecord]:
    return [r for r in records if match_frame(r, frame)]


def descriptive_stats(records: list[RawRecord]) -> DatasetStats:
    """Headline counts for a frame-filtered dataset.

    Unique users is the union of record authors and interaction targets.
    """
    users: set[str] = set()
    retweet_tweets = 0
    mention_tweets = 0
    for record in records:
        users.add(record.author)
        kinds = set()
        for inter in extract_interactions(record):
            users.add(inter.target)
            kinds.add(inter.kind)
        if RETWEET in kinds:
            retweet_tweets += 1
        if MENTION in kinds:
            mention_tweets += 1
    return DatasetStats(
        total_tweets=len(records),
        retweet_tweets=retweet_tweets,
        mention_tweets=mention_tweets,
        unique_users=len(users),
    )


def load_frames(text: str) -> list[FramePattern]:
    """Load frame definitions from YAML/JSON config text.

    Expected shape::

        frames:
          - label: inequality
            patterns:
              - {kind: hashtag_substring, value: 99percent}
              - {kind: phrase, value: we are the 99 percent}
    """
    import yaml

    data = yaml.safe_load(text)
    if isinstance(data, dict) and "frames" in data:
        data = data["frames"]
    if not isinstance(data, list) or not data:
        raise ValueError("frames config must contain a non-empty 'frames' list")
    frames = []
    for entry in data:
        patterns = tuple(
            (p["kind"], str(p["value"]).lower()) for p in entry["patterns"]
        )
        frames.append(FramePattern(label=str(entry["label"]), patterns=patterns))
    return frames

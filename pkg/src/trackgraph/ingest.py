"""Crawl-log parsing, tracker lists and request classification."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator
from urllib.parse import urlsplit

from .errors import IngestError
from .suffix import SuffixRules, normalize_host

log = logging.getLogger(__name__)

KINDS = ("script", "image", "document", "xhr", "other")
MAX_MALFORMED_FRACTION = 0.5


class RequestClass(str, Enum):
    FIRST_PARTY = "FirstParty"
    THIRD_PARTY_TRACKER = "ThirdPartyTracker"
    THIRD_PARTY_OTHER = "ThirdPartyOther"


@dataclass(frozen=True)
class CrawlRecord:
    snapshot_id: str
    publisher_host: str
    request_host: str
    request_path: str
    scheme: str
    resource_kind: str

    @property
    def url(self) -> str:
        return f"{self.scheme}://{self.request_host}{self.request_path}"


@dataclass(frozen=True)
class Snapshot:
    id: str
    date_label: str
    records: tuple[CrawlRecord, ...]
    tracker_list_version: str = ""

    def publisher_hosts(self) -> list[str]:
        return sorted({r.publisher_host for r in self.records})

    def replace_records(self, records: Iterable[CrawlRecord]) -> Snapshot:
        return Snapshot(self.id, self.date_label, tuple(records), self.tracker_list_version)


@dataclass(frozen=True)
class TrackerList:
    version: str
    domains: frozenset[str]
    organizations: dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    def __contains__(self, domain: str) -> bool:
        return domain in self.domains

    def __len__(self) -> int:
        return len(self.domains)


@dataclass
class ParseResult:
    records: list[CrawlRecord]
    skipped: int = 0


# -- crawl logs -------------------------------------------------------------


def _parse_line(line: str, snapshot_id: str) -> CrawlRecord:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("not an object")
    snap = obj.get("snapshot", snapshot_id)
    if snap != snapshot_id:
        raise ValueError(f"record belongs to snapshot {snap!r}")
    publisher = obj["publisher"]
    request = obj["request"]
    kind = obj.get("kind", "other")
    if not isinstance(publisher, str) or not isinstance(request, str) or kind not in KINDS:
        raise ValueError("bad field types")
    if "://" in publisher:
        publisher = urlsplit(publisher).hostname or ""
    publisher = normalize_host(publisher)
    parts = urlsplit(request)
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        raise ValueError(f"unsupported scheme {scheme!r}")
    host = normalize_host(parts.hostname or "")
    if not publisher or not host:
        raise ValueError("empty host")
    return CrawlRecord(snapshot_id, publisher, host, parts.path or "/", scheme, kind)


def parse_crawl_log(stream: IO[str] | Iterable[str], snapshot_id: str) -> ParseResult:
    """Parse a JSON-Lines crawl log.

    Blank lines are ignored. Malformed lines are skipped and counted; a log
    where more than half of the non-blank lines are malformed is rejected.
    """
    records: list[CrawlRecord] = []
    skipped = 0
    try:
        for lineno, line in enumerate(stream, 1):
            if not line.strip():
                continue
            try:
                records.append(_parse_line(line, snapshot_id))
            except (ValueError, KeyError, TypeError) as exc:
                skipped += 1
                log.debug("skipping line %d: %s", lineno, exc)
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"unreadable crawl log: {exc}") from exc
    total = len(records) + skipped
    if total and skipped / total > MAX_MALFORMED_FRACTION:
        raise IngestError(
            f"{skipped} of {total} lines malformed; is this a crawl log in JSON-Lines format?"
        )
    if skipped:
        log.warning("snapshot %s: skipped %d malformed lines", snapshot_id, skipped)
    return ParseResult(records, skipped)


def read_crawl_log(path: str | Path, snapshot_id: str) -> ParseResult:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_crawl_log(fh, snapshot_id)
    except OSError as exc:
        raise IngestError(f"cannot read crawl log {path}: {exc}") from exc


def format_record(record: CrawlRecord) -> str:
    payload = {
        "snapshot": record.snapshot_id,
        "publisher": record.publisher_host,
        "request": record.url,
        "kind": record.resource_kind,
    }
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=True)


def dump_crawl_log(records: Iterable[CrawlRecord]) -> str:
    """Canonical JSON-Lines form; parsing it yields the same records."""
    return "".join(format_record(r) + "\n" for r in records)


# -- tracker lists ----------------------------------------------------------


def _flatten_disconnect(obj: dict) -> Iterator[tuple[str, str]]:
    categories = obj.get("categories", obj)
    if not isinstance(categories, dict):
        raise IngestError("Disconnect JSON has no 'categories' object")
    for entries in categories.values():
        if not isinstance(entries, list):
            continue
        for entry in entries:
            if not isinstance(entry, dict):
                continue
            for org, sites in entry.items():
                if not isinstance(sites, dict):
                    continue
                for domains in sites.values():
                    if isinstance(domains, list):
                        for d in domains:
                            if isinstance(d, str):
                                yield d, org


def parse_tracker_list(text: str, rules: SuffixRules, version: str = "") -> TrackerList:
    """Tracker list from plain text (one domain per line) or Disconnect JSON.

    Entries are reduced to eTLD+1. Entries that are bare public suffixes are
    dropped with a warning.
    """
    stripped = text.lstrip()
    pairs: Iterable[tuple[str, str | None]]
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid tracker list JSON: {exc}") from exc
        pairs = _flatten_disconnect(obj)
    else:
        pairs = (
            (line.split("#", 1)[0].strip(), None)
            for line in text.splitlines()
        )
    domains: set[str] = set()
    orgs: dict[str, str] = {}
    dropped = 0
    for raw, org in pairs:
        if not raw:
            continue
        try:
            d = rules.etld1(raw)
        except ValueError:
            dropped += 1
            continue
        domains.add(d)
        if org and d not in orgs:
            orgs[d] = org
    if dropped:
        log.warning("tracker list %s: dropped %d unregistrable entries", version, dropped)
    return TrackerList(version, frozenset(domains), orgs)


def load_tracker_list(path: str | Path, rules: SuffixRules, version: str | None = None) -> TrackerList:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read tracker list {path}: {exc}") from exc
    return parse_tracker_list(text, rules, version if version is not None else Path(path).stem)


def load_org_map(path: str | Path, rules: SuffixRules) -> dict[str, str]:
    """Sidecar ``domain,organization`` CSV used only for report labels."""
    orgs: dict[str, str] = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if len(row) < 2 or row[0].strip().lower() in ("domain", ""):
                    continue
                try:
                    orgs[rules.etld1(row[0])] = row[1].strip()
                except ValueError:
                    continue
    except OSError as exc:
        raise IngestError(f"cannot read organization map {path}: {exc}") from exc
    return orgs


# -- classification ---------------------------------------------------------


def _classify(record: CrawlRecord, trackers: TrackerList, rules: SuffixRules) -> tuple[RequestClass, bool]:
    try:
        pub = rules.etld1(record.publisher_host)
        req = rules.etld1(record.request_host)
    except ValueError:
        return RequestClass.THIRD_PARTY_OTHER, True
    if pub == req:
        return RequestClass.FIRST_PARTY, False
    if req in trackers.domains:
        return RequestClass.THIRD_PARTY_TRACKER, False
    return RequestClass.THIRD_PARTY_OTHER, False


def classify_request(record: CrawlRecord, trackers: TrackerList, rules: SuffixRules) -> RequestClass:
    return _classify(record, trackers, rules)[0]


@dataclass
class ClassifiedSnapshot:
    classes: list[RequestClass]
    anomalies: int

    def counts(self) -> dict[str, int]:
        c = Counter(self.classes)
        return {k.value: c.get(k, 0) for k in RequestClass}


def classify_snapshot(snapshot: Snapshot, trackers: TrackerList, rules: SuffixRules) -> ClassifiedSnapshot:
    classes = []
    anomalies = 0
    for r in snapshot.records:
        cls, bad = _classify(r, trackers, rules)
        classes.append(cls)
        anomalies += bad
    return ClassifiedSnapshot(classes, anomalies)


def publisher_key(host: str, rules: SuffixRules) -> str:
    """Publisher identity: eTLD+1 when registrable, else the host itself."""
    try:
        return rules.etld1(host)
    except ValueError:
        return host


def filter_publishers(snapshot: Snapshot, trackers: TrackerList, rules: SuffixRules) -> Snapshot:
    """Keep only the records of publishers that embed at least one tracker."""
    keep = set()
    for r in snapshot.records:
        if classify_request(r, trackers, rules) is RequestClass.THIRD_PARTY_TRACKER:
            keep.add(publisher_key(r.publisher_host, rules))
    out = snapshot.replace_records(
        r for r in snapshot.records if publisher_key(r.publisher_host, rules) in keep
    )
    log.info("snapshot %s: %d publishers with trackers", snapshot.id, len(keep))
    return out


def publishers(snapshot: Snapshot, rules: SuffixRules) -> list[str]:
    return sorted({publisher_key(r.publisher_host, rules) for r in snapshot.records})

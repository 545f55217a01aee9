"""Per-publisher network activity of trackers, HTTPS adoption and CDF series."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import GraphError
from .ingest import RequestClass, Snapshot, TrackerList, classify_request, publisher_key
from .suffix import SuffixRules

log = logging.getLogger(__name__)

PANELS = ("unique_trackers", "total_tracker_requests", "avg_requests_per_tracker", "library_providers")


@dataclass(frozen=True)
class PublisherActivity:
    publisher: str
    unique_trackers: int
    total_tracker_requests: int
    avg_requests_per_tracker: float
    library_providers: int


@dataclass(frozen=True)
class CdfSeries:
    points: tuple[tuple[float, float], ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)


def publisher_activity(
    snapshot: Snapshot, trackers: TrackerList, rules: SuffixRules
) -> dict[str, PublisherActivity]:
    """Tracker activity per publisher, for publishers with at least one tracker request.

    Library providers are the distinct full hostnames that served scripts
    from tracker domains, so two subdomains of one tracker count twice.
    """
    per_tracker: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    script_hosts: dict[str, set[str]] = defaultdict(set)
    for r in snapshot.records:
        if classify_request(r, trackers, rules) is not RequestClass.THIRD_PARTY_TRACKER:
            continue
        pub = publisher_key(r.publisher_host, rules)
        per_tracker[pub][rules.etld1(r.request_host)] += 1
        if r.resource_kind == "script":
            script_hosts[pub].add(r.request_host)
    out = {}
    for pub in sorted(per_tracker):
        counts = per_tracker[pub]
        unique = len(counts)
        total = sum(counts.values())
        out[pub] = PublisherActivity(pub, unique, total, total / unique, len(script_hosts[pub]))
    return out


def https_status(snapshot: Snapshot, rules: SuffixRules) -> dict[str, tuple[bool, bool]]:
    """Per publisher: (uses https, flagged).

    The scheme comes from the publisher's first first-party document request.
    Publishers without one fall back to their first record and are flagged.
    """
    status: dict[str, tuple[bool, bool]] = {}
    fallback: dict[str, bool] = {}
    for r in snapshot.records:
        pub = publisher_key(r.publisher_host, rules)
        fallback.setdefault(pub, r.scheme == "https")
        if pub in status or r.resource_kind != "document":
            continue
        try:
            same = rules.etld1(r.request_host) == pub
        except ValueError:
            same = False
        if same:
            status[pub] = (r.scheme == "https", False)
    for pub, https in fallback.items():
        if pub not in status:
            status[pub] = (https, True)
    return dict(sorted(status.items()))


def https_adoption(snapshot: Snapshot, rules: SuffixRules | None = None) -> float:
    """Fraction of publishers whose visited page was served over HTTPS."""
    rules = rules or SuffixRules.default()
    status = https_status(snapshot, rules)
    if not status:
        raise GraphError("https adoption undefined for a snapshot without publishers")
    flagged = [p for p, (_, f) in status.items() if f]
    if flagged:
        log.warning("%d publishers lack a first-party document request", len(flagged))
    return sum(1 for https, _ in status.values() if https) / len(status)


def cdf(values: Iterable[float]) -> CdfSeries:
    """Empirical CDF; duplicate values are merged into one step."""
    xs = sorted(values)
    if not xs:
        raise GraphError("cdf of an empty series")
    n = len(xs)
    points = []
    for i, x in enumerate(xs):
        if i + 1 < n and xs[i + 1] == x:
            continue
        points.append((x, (i + 1) / n))
    return CdfSeries(tuple(points))


def nearest_rank(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile, ``q`` in [0, 100]."""
    xs = sorted(values)
    if not xs:
        raise GraphError("percentile of an empty series")
    if not 0 <= q <= 100:
        raise ValueError("percentile must be in [0, 100]")
    rank = max(1, math.ceil(q / 100 * len(xs)))
    return xs[rank - 1]


def panel_values(activity: dict[str, PublisherActivity], panel: str) -> list[tuple[str, float]]:
    return [(pub, getattr(a, panel)) for pub, a in activity.items()]


def activity_summary(activity: dict[str, PublisherActivity], https: float | None = None) -> dict:
    out: dict = {"publishers": len(activity)}
    for panel in PANELS:
        vals = [getattr(a, panel) for a in activity.values()]
        out[panel] = {
            "median": nearest_rank(vals, 50) if vals else None,
            "p90": nearest_rank(vals, 90) if vals else None,
        }
    out["https_adoption"] = https
    return out

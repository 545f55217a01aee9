"""Cross-snapshot alignment, trends and top-K stability classes."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Sequence

from .errors import GraphError
from .ingest import Snapshot, publisher_key
from .ptgraph import TrackerRanking
from .suffix import SuffixRules

LEGEND = {"stable": "(*)", "dropped": "(+/-)", "climbed": "(+)", "transient": ""}
_DATE_FORMATS = ("%b%y", "%Y-%m-%d", "%Y-%m", "%B %Y", "%b %Y")


def parse_date_label(label: str) -> datetime | None:
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(label, fmt)
        except ValueError:
            continue
    return None


@dataclass(frozen=True)
class SnapshotSeries:
    snapshots: tuple[Snapshot, ...]
    common_publishers: frozenset[str]

    @property
    def labels(self) -> list[tuple[str, str]]:
        return [(s.id, s.date_label) for s in self.snapshots]


def align(snapshots: Sequence[Snapshot], rules: SuffixRules) -> SnapshotSeries:
    """Restrict every snapshot to the publishers present in all of them.

    Publishers are matched by eTLD+1. Snapshots are put in chronological
    order when every date label parses; otherwise the given order is kept.
    """
    if len(snapshots) < 2:
        raise GraphError("alignment needs at least 2 snapshots")
    dates = [parse_date_label(s.date_label) for s in snapshots]
    ordered = list(snapshots)
    if all(d is not None for d in dates):
        ordered = [s for _, s in sorted(zip(dates, snapshots), key=lambda p: p[0])]
    sets = [{publisher_key(r.publisher_host, rules) for r in s.records} for s in ordered]
    common = set.intersection(*sets)
    if not common:
        raise GraphError("snapshots share no publishers")
    filtered = tuple(
        s.replace_records(r for r in s.records if publisher_key(r.publisher_host, rules) in common)
        for s in ordered
    )
    return SnapshotSeries(filtered, frozenset(common))


@dataclass(frozen=True)
class Trend:
    name: str
    values: tuple[tuple[str, float], ...]
    change_pct: float | None


def relative_change(first: float, last: float) -> float | None:
    if first == 0:
        return None
    return (last - first) / first * 100.0


def trend_table(
    series: SnapshotSeries | Sequence[tuple[str, float]],
    extractor: Callable[[Snapshot], float] | None = None,
    name: str = "",
) -> Trend:
    """Scalar per snapshot plus the first-to-last relative change in percent."""
    if isinstance(series, SnapshotSeries):
        if extractor is None:
            raise ValueError("extractor is required for a SnapshotSeries")
        values = tuple((s.id, float(extractor(s))) for s in series.snapshots)
    else:
        values = tuple((sid, float(v)) for sid, v in series)
    if not values:
        raise GraphError("empty trend")
    return Trend(name, values, relative_change(values[0][1], values[-1][1]))


@dataclass(frozen=True)
class StabilityEntry:
    tracker: str
    cls: str
    ranks: tuple[int | None, ...]
    avg_coverage: float
    organization: str

    @property
    def symbol(self) -> str:
        return LEGEND[self.cls]


@dataclass(frozen=True)
class StabilityReport:
    k: int
    entries: tuple[StabilityEntry, ...]

    def by_class(self, cls: str) -> list[str]:
        return [e.tracker for e in self.entries if e.cls == cls]

    def classes(self) -> dict[str, str]:
        return {e.tracker: e.cls for e in self.entries}


def _classify(ranks: Sequence[int | None], k: int) -> str:
    inside = [r is not None and r <= k for r in ranks]
    if all(inside):
        return "stable"
    first_seen = next(i for i, r in enumerate(ranks) if r is not None)
    if inside[first_seen] and not inside[-1]:
        return "dropped"
    if not inside[0] and inside[-1]:
        return "climbed"
    return "transient"


def topk_stability(rankings: Sequence[TrackerRanking], k: int = 25) -> StabilityReport:
    """Classify every tracker that reaches the top ``k`` of any snapshot.

    Rankings are chronological and should be full (not cut at ``k``) so a
    tracker's rank below the cut is known; absent trackers have no rank and
    zero coverage for that snapshot.
    """
    if len(rankings) < 2:
        raise GraphError("stability needs at least 2 rankings")
    if k < 1 or all(k > len(r) for r in rankings):
        raise GraphError(f"k={k} exceeds every ranking length")
    positions = []
    coverage: dict[str, list[float]] = {}
    orgs: dict[str, str] = {}
    for i, ranking in enumerate(rankings):
        pos = {}
        for rank, e in enumerate(ranking.entries, 1):
            pos[e.tracker] = rank
            coverage.setdefault(e.tracker, [0.0] * len(rankings))[i] = e.coverage
            orgs.setdefault(e.tracker, e.organization)
        positions.append(pos)
    candidates = sorted({t for pos in positions for t, r in pos.items() if r <= k})
    entries = []
    for t in candidates:
        ranks = tuple(pos.get(t) for pos in positions)
        cls = _classify(ranks, k)
        entries.append(StabilityEntry(t, cls, ranks, sum(coverage[t]) / len(rankings), orgs[t]))
    order = {"stable": 0, "dropped": 1, "climbed": 2, "transient": 3}
    entries.sort(key=lambda e: (order[e.cls], -e.avg_coverage, e.tracker))
    return StabilityReport(k, tuple(entries))

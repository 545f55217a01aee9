"""Publisher-tracker bipartite graphs, their summaries, correlations and rankings."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from . import graphcore as gc
from .errors import GraphError
from .graphcore import Graph, GraphSummary, NodeMetrics, Role
from .ingest import RequestClass, Snapshot, TrackerList, classify_request, publisher_key
from .netstats import CdfSeries, cdf
from .suffix import SuffixRules

SIGNIFICANCE = 0.009
METRICS = ("degree_centrality", "betweenness", "coreness")
PUBLISHER_SUFFIX = "#publisher"


@dataclass(frozen=True)
class PtGraph:
    graph: Graph

    def __post_init__(self) -> None:
        for a, b, _ in self.graph.edges():
            if self.graph.role(a) == self.graph.role(b):
                raise GraphError(f"same-role edge ({a}, {b}) in PT graph")

    @property
    def publishers(self) -> list[str]:
        return self.graph.nodes_with_role(Role.PUBLISHER)

    @property
    def trackers(self) -> list[str]:
        return self.graph.nodes_with_role(Role.TRACKER)

    def lcc(self) -> PtGraph:
        return PtGraph(gc.lcc(self.graph))

    def dropped(self) -> list[str]:
        """Nodes outside the largest connected component."""
        keep = set(gc.lcc(self.graph).nodes())
        return [v for v in self.graph.nodes() if v not in keep]


def build_pt(snapshot: Snapshot, trackers: TrackerList, rules: SuffixRules) -> PtGraph:
    """One edge per (tracker, publisher) pair weighted by the tracker request count.

    A publisher whose domain is also an observed tracker node is renamed
    ``<domain>#publisher`` so that the two roles stay distinct nodes.
    """
    counts: Counter[tuple[str, str]] = Counter()
    for r in snapshot.records:
        if classify_request(r, trackers, rules) is RequestClass.THIRD_PARTY_TRACKER:
            counts[(publisher_key(r.publisher_host, rules), rules.etld1(r.request_host))] += 1
    tracker_nodes = {t for _, t in counts}
    roles: dict[str, Role] = {t: Role.TRACKER for t in tracker_nodes}

    def pub_id(p: str) -> str:
        return p + PUBLISHER_SUFFIX if p in tracker_nodes else p

    for p, _ in counts:
        roles[pub_id(p)] = Role.PUBLISHER
    edges = [(pub_id(p), t, float(w)) for (p, t), w in sorted(counts.items())]
    return PtGraph(Graph(dict(sorted(roles.items())), edges))


def pt_summary(g: PtGraph, with_redundancy: bool = True) -> GraphSummary:
    """Summary of the LCC with bipartite density."""
    if g.graph.n_edges == 0:
        raise GraphError("no publishers with trackers")
    s = gc.summarize(g.graph, mode="bipartite", with_redundancy=with_redundancy)
    core = gc.lcc(g.graph)
    return GraphSummary(
        **{
            **s.to_dict(),
            "n_publishers": len(core.nodes_with_role(Role.PUBLISHER)),
            "n_trackers": len(core.nodes_with_role(Role.TRACKER)),
        }
    )


@dataclass
class PtNodeMetrics:
    metrics: dict[str, NodeMetrics]
    roles: dict[str, Role]
    dropped: list[str] = field(default_factory=list)

    def for_role(self, role: Role | str) -> dict[str, NodeMetrics]:
        role = Role(role)
        return {v: m for v, m in self.metrics.items() if self.roles[v] is role}

    def series(self, role: Role | str, metric: str) -> list[float]:
        return [getattr(m, metric) for m in self.for_role(role).values()]

    def cdfs(self) -> dict[tuple[str, str], CdfSeries]:
        out = {}
        for role in (Role.PUBLISHER, Role.TRACKER):
            for metric in METRICS:
                vals = self.series(role, metric)
                if vals:
                    out[(role.value, metric)] = cdf(vals)
        return out


def pt_node_metrics(g: PtGraph) -> PtNodeMetrics:
    """Degree centrality, betweenness and coreness on the LCC, split by role."""
    core = gc.lcc(g.graph)
    if core.n_nodes < 2:
        raise GraphError("no publishers with trackers")
    return PtNodeMetrics(gc.node_metrics(core), core.roles(), g.dropped())


@dataclass(frozen=True)
class Correlation:
    pair: str
    r: float | None
    p: float | None

    @property
    def defined(self) -> bool:
        return self.r is not None

    @property
    def significant(self) -> bool:
        return self.p is not None and self.p < SIGNIFICANCE


PAIRS = (("DC-BC", "degree_centrality", "betweenness"),
         ("DC-CP", "degree_centrality", "coreness"),
         ("BC-CP", "betweenness", "coreness"))


def metric_correlations(metrics: Mapping[str, NodeMetrics], role: str | None = None) -> list[Correlation]:
    """Pearson DC-BC, DC-CP and BC-CP over one role's nodes.

    ``metrics`` may be a PtNodeMetrics (filtered by ``role``) or a plain map
    of already-selected nodes. Constant series give an undefined pair.
    """
    if isinstance(metrics, PtNodeMetrics):
        if role is None:
            raise ValueError("role is required with PtNodeMetrics")
        metrics = metrics.for_role(role)
    rows = list(metrics.values())
    if len(rows) < 3:
        raise GraphError(f"correlations need at least 3 {role or 'node'}s, got {len(rows)}")
    out = []
    for name, a, b in PAIRS:
        xs = [getattr(m, a) for m in rows]
        ys = [getattr(m, b) for m in rows]
        try:
            r, p = gc.pearson(xs, ys)
        except GraphError:
            out.append(Correlation(name, None, None))
        else:
            out.append(Correlation(name, r, p))
    return out


@dataclass(frozen=True)
class RankEntry:
    tracker: str
    value: float
    coverage: float  # percent of LCC publishers
    organization: str


@dataclass(frozen=True)
class TrackerRanking:
    metric: str
    entries: tuple[RankEntry, ...]
    truncated: bool = False

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> list[str]:
        return [e.tracker for e in self.entries]


def top_k(
    g: PtGraph,
    metric: str = "degree",
    k: int | None = 25,
    organizations: Mapping[str, str] | None = None,
    node_metrics: PtNodeMetrics | None = None,
) -> TrackerRanking:
    """Trackers of the LCC ranked by degree centrality or betweenness.

    ``k=None`` returns the full ranking. Ties break by domain name.
    """
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    field_name = {"degree": "degree_centrality", "betweenness": "betweenness"}.get(metric)
    if field_name is None:
        raise ValueError(f"unknown ranking metric {metric!r}")
    core = gc.lcc(g.graph)
    nm = node_metrics or pt_node_metrics(g)
    n_pub = len(core.nodes_with_role(Role.PUBLISHER))
    organizations = organizations or {}
    entries = [
        RankEntry(t, getattr(m, field_name), 100.0 * core.degree(t) / n_pub, organizations.get(t, t))
        for t, m in nm.for_role(Role.TRACKER).items()
    ]
    entries.sort(key=lambda e: (-e.value, e.tracker))
    truncated = k is not None and k > len(entries)
    if k is not None:
        entries = entries[:k]
    return TrackerRanking(metric, tuple(entries), truncated)

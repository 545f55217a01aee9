"""Tracker-tracker co-occurrence graphs derived from PT graphs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from . import graphcore as gc
from .errors import GraphError
from .graphcore import Graph, GraphSummary, Role
from .ptgraph import PtGraph

DEFAULT_THETA = 2


@dataclass(frozen=True)
class TtGraph:
    graph: Graph
    theta: int = DEFAULT_THETA


def cooccurrence(pt: PtGraph) -> Counter[tuple[str, str]]:
    """Number of publishers shared by every co-occurring tracker pair."""
    g = pt.graph
    counts: Counter[tuple[str, str]] = Counter()
    for p in g.nodes_with_role(Role.PUBLISHER):
        ts = [t for t in g.neighbors(p) if g.role(t) is Role.TRACKER]
        counts.update(combinations(ts, 2))
    return counts


def build_tt(pt: PtGraph, theta: int = DEFAULT_THETA) -> TtGraph:
    """Trackers joined when they co-occur in at least ``theta`` publishers.

    Presence counts, not request volume. Every tracker of ``pt`` is kept as a
    node, isolated or not.
    """
    if theta < 1:
        raise ValueError("theta must be >= 1")
    edges = [(a, b, float(w)) for (a, b), w in sorted(cooccurrence(pt).items()) if w >= theta]
    nodes = {t: Role.TRACKER for t in pt.trackers}
    return TtGraph(Graph(nodes, edges), theta)


def tt_summary(g: TtGraph, with_redundancy: bool = False) -> GraphSummary:
    """Summary of the TT graph's LCC (general density). ``n_nodes_all`` counts isolated trackers too."""
    if g.graph.n_edges == 0:
        raise GraphError("TT graph has no edges")
    s = gc.summarize(g.graph, mode="general", with_redundancy=with_redundancy)
    return GraphSummary(**{**s.to_dict(), "n_trackers": s.n_nodes})

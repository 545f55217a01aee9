"""Undirected weighted graphs and the metric suite used by the PT and TT analyses.

All shortest-path based metrics (betweenness, diameter) use hop counts;
edge weights only enter the normalized average weight. Node iteration order
is lexicographic everywhere so outputs are bit-stable.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from scipy import stats

from . import parallel
from .errors import GraphError


class Role(str, Enum):
    PUBLISHER = "publisher"
    TRACKER = "tracker"
    UNTYPED = "untyped"


class Graph:
    """Immutable simple undirected graph with positive edge weights and node roles.

    ``nodes`` is either a mapping of node id to role or an iterable of ids
    (untyped). Edge endpoints missing from ``nodes`` are added as untyped.
    """

    def __init__(
        self,
        nodes: Mapping[str, Role | str] | Iterable[str] = (),
        edges: Iterable[tuple[str, str] | tuple[str, str, float]] = (),
    ) -> None:
        if isinstance(nodes, Mapping):
            roles = {str(n): Role(r) for n, r in nodes.items()}
        else:
            roles = {str(n): Role.UNTYPED for n in nodes}
        adj: dict[str, dict[str, float]] = {n: {} for n in roles}
        for e in edges:
            a, b = e[0], e[1]
            w = float(e[2]) if len(e) > 2 else 1.0
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            if not w > 0 or math.isinf(w):
                raise GraphError(f"edge ({a}, {b}) has non-positive weight {w}")
            for x in (a, b):
                if x not in roles:
                    roles[x] = Role.UNTYPED
                    adj[x] = {}
            if b in adj[a]:
                raise GraphError(f"duplicate edge ({a}, {b})")
            adj[a][b] = w
            adj[b][a] = w
        self._roles = roles
        self._adj = adj

    # -- basic accessors ---------------------------------------------------

    @cached_property
    def _order(self) -> list[str]:
        return sorted(self._roles)

    @cached_property
    def _indexed(self) -> tuple[list[str], dict[str, int], list[list[int]]]:
        order = self._order
        index = {v: i for i, v in enumerate(order)}
        adj = [sorted(index[u] for u in self._adj[v]) for v in order]
        return order, index, adj

    def nodes(self) -> list[str]:
        return list(self._order)

    def edges(self) -> list[tuple[str, str, float]]:
        out = []
        for a in self._order:
            for b, w in self._adj[a].items():
                if a < b:
                    out.append((a, b, w))
        out.sort()
        return out

    def edge_set(self) -> set[tuple[str, str]]:
        return {(a, b) for a, b, _ in self.edges()}

    @property
    def n_nodes(self) -> int:
        return len(self._roles)

    @property
    def n_edges(self) -> int:
        return sum(len(n) for n in self._adj.values()) // 2

    def __contains__(self, node: str) -> bool:
        return node in self._roles

    def __len__(self) -> int:
        return len(self._roles)

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def role(self, node: str) -> Role:
        return self._roles[node]

    def roles(self) -> dict[str, Role]:
        return {v: self._roles[v] for v in self._order}

    def nodes_with_role(self, role: Role | str) -> list[str]:
        role = Role(role)
        return [v for v in self._order if self._roles[v] is role]

    def neighbors(self, node: str) -> list[str]:
        return sorted(self._adj[node])

    def degree(self, node: str) -> int:
        return len(self._adj[node])

    def weight(self, a: str, b: str) -> float:
        return self._adj[a][b]

    def has_edge(self, a: str, b: str) -> bool:
        return a in self._adj and b in self._adj[a]

    def total_weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges())

    def subgraph(self, nodes: Iterable[str]) -> Graph:
        keep = {v for v in nodes if v in self._roles}
        return Graph(
            {v: self._roles[v] for v in sorted(keep)},
            [(a, b, w) for a, b, w in self.edges() if a in keep and b in keep],
        )


# -- components -------------------------------------------------------------


def connected_components(g: Graph) -> list[list[str]]:
    """Components sorted by size (descending), then by smallest node id."""
    order, _, adj = g._indexed
    seen = [False] * len(order)
    comps = []
    for s in range(len(order)):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    comp.append(u)
                    queue.append(u)
        comps.append(sorted(order[i] for i in comp))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def lcc(g: Graph) -> Graph:
    """Largest connected component; ties go to the component holding the smallest node id."""
    if g.n_nodes == 0:
        return g
    comps = connected_components(g)
    if len(comps[0]) == g.n_nodes:
        return g
    return g.subgraph(comps[0])


def is_connected(g: Graph) -> bool:
    return g.n_nodes > 0 and len(connected_components(g)) == 1


# -- centrality -------------------------------------------------------------


def degree_centrality(g: Graph) -> dict[str, float]:
    n = g.n_nodes
    if n < 2:
        raise GraphError("degree centrality needs at least 2 nodes")
    return {v: g.degree(v) / (n - 1) for v in g.nodes()}


def _brandes_block(adj: list[list[int]], lo: int, hi: int) -> list[float]:
    n = len(adj)
    acc = [0.0] * n
    for s in range(lo, hi):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v] + 1
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                acc[w] += delta[w]
    return acc


def betweenness(g: Graph) -> dict[str, float]:
    """Brandes betweenness over hop-count shortest paths.

    Normalized by the number of node pairs not containing the node,
    (N-1)(N-2)/2, so values lie in [0, 1].
    """
    order, _, adj = g._indexed
    n = len(order)
    if n < 3:
        return {v: 0.0 for v in order}
    raw = parallel.ordered_sum(parallel.map_blocks(_brandes_block, n, adj), n)
    # every unordered pair is counted from both endpoints
    scale = 1.0 / ((n - 1) * (n - 2))
    return {v: raw[i] * scale for i, v in enumerate(order)}


def core_numbers(g: Graph) -> dict[str, int]:
    """k-core number of every node (bucket-based minimum-degree peeling)."""
    order, _, adj = g._indexed
    n = len(order)
    deg = [len(a) for a in adj]
    maxdeg = max(deg, default=0)
    bins = [0] * (maxdeg + 1)
    for d in deg:
        bins[d] += 1
    start = 0
    for d in range(maxdeg + 1):
        bins[d], start = start, start + bins[d]
    pos = [0] * n
    vert = [0] * n
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(maxdeg, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(n):
        v = vert[i]
        for u in adj[v]:
            if deg[u] > deg[v]:
                du, pu = deg[u], pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bins[du] += 1
                deg[u] -= 1
    return {order[v]: deg[v] for v in range(n)}


def coreness(g: Graph) -> dict[str, float]:
    """Core number normalized by the graph's maximum core number (0 if edgeless)."""
    cores = core_numbers(g)
    top = max(cores.values(), default=0)
    if top == 0:
        return {v: 0.0 for v in cores}
    return {v: c / top for v, c in cores.items()}


# -- clustering -------------------------------------------------------------


def local_clustering(g: Graph) -> dict[str, float]:
    order, _, adj = g._indexed
    sets = [set(a) for a in adj]
    out = {}
    for v, nb in enumerate(adj):
        d = len(nb)
        if d < 2:
            out[order[v]] = 0.0
            continue
        links = sum(len(sets[u] & sets[v]) for u in nb) // 2
        out[order[v]] = 2.0 * links / (d * (d - 1))
    return out


def avg_clustering(g: Graph) -> float:
    """Mean local triangle clustering; nodes of degree < 2 contribute 0."""
    if g.n_nodes == 0:
        return 0.0
    return math.fsum(local_clustering(g).values()) / g.n_nodes


def redundancy(g: Graph) -> dict[str, float]:
    """Bipartite redundancy coefficient of every node.

    Fraction of neighbor pairs {u, w} of v that share some other common
    neighbor besides v. Nodes of degree < 2 get 0.
    """
    order, _, adj = g._indexed
    out = {}
    for v, nb in enumerate(adj):
        d = len(nb)
        if d < 2:
            out[order[v]] = 0.0
            continue
        masks: dict[int, int] = defaultdict(int)
        for i, u in enumerate(nb):
            bit = 1 << i
            for w in adj[u]:
                if w != v:
                    masks[w] |= bit
        linked = 0
        for i, u in enumerate(nb):
            cover = 0
            for w in adj[u]:
                if w != v:
                    cover |= masks[w]
            linked += bin(cover & ~(1 << i)).count("1")
        out[order[v]] = (linked / 2) / (d * (d - 1) / 2)
    return out


def avg_redundancy(g: Graph) -> float:
    if g.n_nodes == 0:
        return 0.0
    return math.fsum(redundancy(g).values()) / g.n_nodes


# -- global statistics ------------------------------------------------------


def density(g: Graph, mode: str = "general") -> float:
    """``general``: 2E / (N(N-1)); ``bipartite``: E / (|publishers| |trackers|)."""
    e = g.n_edges
    if mode == "general":
        n = g.n_nodes
        if n < 2:
            raise GraphError("general density undefined for fewer than 2 nodes")
        return 2.0 * e / (n * (n - 1))
    if mode == "bipartite":
        p = len(g.nodes_with_role(Role.PUBLISHER))
        t = len(g.nodes_with_role(Role.TRACKER))
        if p == 0 or t == 0:
            raise GraphError("bipartite density needs both publishers and trackers")
        return e / (p * t)
    raise GraphError(f"unknown density mode {mode!r}")


def _ecc_block(adj: list[list[int]], lo: int, hi: int) -> tuple[int, bool]:
    n = len(adj)
    best = 0
    for s in range(lo, hi):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        reached = 1
        far = 0
        while queue:
            v = queue.popleft()
            dv = dist[v] + 1
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    far = dv
                    reached += 1
                    queue.append(w)
        if reached != n:
            return best, False
        best = max(best, far)
    return best, True


def diameter(g: Graph) -> int:
    """Exact hop-count diameter by BFS from every node; the graph must be connected."""
    order, _, adj = g._indexed
    if not order:
        raise GraphError("diameter of an empty graph")
    results = parallel.map_blocks(_ecc_block, len(order), adj)
    if not all(ok for _, ok in results):
        raise GraphError("graph is disconnected; call lcc first")
    return max(d for d, _ in results)


def norm_avg_weight(g: Graph) -> float:
    """Mean of w / max_w over all edges."""
    weights = [w for _, _, w in g.edges()]
    if not weights:
        raise GraphError("normalized average weight undefined for an edgeless graph")
    top = max(weights)
    return math.fsum(w / top for w in weights) / len(weights)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Sample Pearson r and its two-sided p-value (t-test, n-2 dof).

    The moment sums are exact (rational arithmetic) and r is rounded once at
    the end, so exactly linear data gives r = +-1 without drift.
    """
    n = len(xs)
    if n != len(ys):
        raise GraphError("pearson: series lengths differ")
    if n < 3:
        raise GraphError("pearson needs at least 3 points")
    fx = [Fraction(x) for x in xs]
    fy = [Fraction(y) for y in ys]
    sx, sy = sum(fx), sum(fy)
    sxx = n * sum(a * a for a in fx) - sx * sx
    syy = n * sum(b * b for b in fy) - sy * sy
    if sxx == 0 or syy == 0:
        raise GraphError("constant series")
    sxy = n * sum(a * b for a, b in zip(fx, fy)) - sx * sy
    r = math.copysign(math.sqrt(float(sxy * sxy / (sxx * syy))), sxy)
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return r, min(1.0, p)


# -- bundles ----------------------------------------------------------------


@dataclass(frozen=True)
class NodeMetrics:
    degree_centrality: float
    betweenness: float
    coreness: float


@dataclass(frozen=True)
class GraphSummary:
    n_nodes: int
    n_edges: int
    norm_avg_weight: float
    avg_clustering: float
    density: float
    diameter: int
    cc_redundancy: float | None = None
    n_nodes_all: int | None = None
    n_publishers: int | None = None
    n_trackers: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def node_metrics(g: Graph) -> dict[str, NodeMetrics]:
    dc = degree_centrality(g)
    bc = betweenness(g)
    cp = coreness(g)
    return {v: NodeMetrics(dc[v], bc[v], cp[v]) for v in g.nodes()}


def summarize(g: Graph, mode: str = "general", with_redundancy: bool = False) -> GraphSummary:
    """Summary statistics of the largest connected component of ``g``."""
    core = lcc(g)
    if core.n_edges == 0:
        raise GraphError("graph has no edges")
    return GraphSummary(
        n_nodes=core.n_nodes,
        n_edges=core.n_edges,
        norm_avg_weight=norm_avg_weight(core),
        avg_clustering=avg_clustering(core),
        density=density(core, mode),
        diameter=diameter(core),
        cc_redundancy=avg_redundancy(core) if with_redundancy else None,
        n_nodes_all=g.n_nodes,
    )

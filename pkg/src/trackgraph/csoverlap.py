"""Cookie-synchronization ground truth and its overlap with TT graphs."""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .errors import GraphError, IngestError
from .graphcore import Graph, Role
from .suffix import SuffixRules
from .ttgraph import TtGraph

log = logging.getLogger(__name__)

Edge = tuple[str, str]

DEFINITIONS = {
    "o_common": "|E_CS & E_TT| / |E_CS| * 100",
    "o_neg_tt": "|E_CS - E_TT| / |E_CS| * 100",
    "o_neg_cs": "|E_TT - E_CS| / |E_TT| * 100",
    "scope": "both edge sets induced on the trackers common to CS and TT",
}


@dataclass(frozen=True)
class CsGraph:
    graph: Graph
    weighted: bool = True
    self_loops_dropped: int = 0


def _edge(a: str, b: str) -> Edge:
    return (a, b) if a < b else (b, a)


def parse_cs(
    stream: IO[str] | Iterable[str],
    rules: SuffixRules,
    assume_unit_weights: bool = False,
) -> CsGraph:
    """Parse ``domain_a,domain_b[,weight]`` rows.

    Domains are reduced to eTLD+1, repeated pairs are merged by summing
    weights and self-loops are dropped. Without a weight column the graph is
    unweighted unless ``assume_unit_weights`` is set.
    """
    reader = csv.reader(stream)
    weights: dict[Edge, float] = defaultdict(float)
    loops = 0
    rows = 0
    has_weight: bool | None = None
    try:
        for lineno, row in enumerate(reader, 1):
            cells = [c.strip() for c in row]
            if not any(cells):
                continue
            if lineno == 1 and cells[0].lower() == "domain_a":
                has_weight = len(cells) > 2 and cells[2].lower() == "weight"
                continue
            if len(cells) < 2:
                raise IngestError(f"CS line {lineno}: expected domain_a,domain_b[,weight]")
            rows += 1
            row_weighted = len(cells) > 2 and cells[2] != ""
            if has_weight is None:
                has_weight = row_weighted
            if row_weighted:
                try:
                    w = float(cells[2])
                except ValueError as exc:
                    raise IngestError(f"CS line {lineno}: non-numeric weight {cells[2]!r}") from exc
                if not w > 0 or math.isinf(w):
                    raise IngestError(f"CS line {lineno}: weight must be positive, got {cells[2]!r}")
            elif has_weight and not assume_unit_weights:
                raise IngestError(f"CS line {lineno}: missing weight")
            else:
                w = 1.0
            try:
                a, b = rules.etld1(cells[0]), rules.etld1(cells[1])
            except ValueError as exc:
                raise IngestError(f"CS line {lineno}: {exc}") from exc
            if a == b:
                loops += 1
                continue
            weights[_edge(a, b)] += w
    except csv.Error as exc:
        raise IngestError(f"malformed CS file: {exc}") from exc
    if rows == 0:
        raise IngestError("empty CS file")
    if loops:
        log.info("dropped %d CS self-loops", loops)
    weighted = bool(has_weight) or assume_unit_weights
    edges = [(a, b, w) for (a, b), w in sorted(weights.items())]
    nodes = sorted({x for e in weights for x in e})
    return CsGraph(Graph({n: Role.TRACKER for n in nodes}, edges), weighted, loops)


def load_cs(path: str | Path, rules: SuffixRules, assume_unit_weights: bool = False) -> CsGraph:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return parse_cs(fh, rules, assume_unit_weights)
    except OSError as exc:
        raise IngestError(f"cannot read CS file {path}: {exc}") from exc


def restrict_common(cs: CsGraph, tt: TtGraph) -> tuple[CsGraph, TtGraph, int]:
    """Induce both graphs on the trackers they share."""
    common = set(cs.graph.nodes()) & set(tt.graph.nodes())
    if not common:
        raise GraphError("no common trackers")
    return (
        CsGraph(cs.graph.subgraph(common), cs.weighted, cs.self_loops_dropped),
        TtGraph(tt.graph.subgraph(common), tt.theta),
        len(common),
    )


@dataclass(frozen=True)
class EdgeSets:
    common: frozenset[Edge]
    cs_only: frozenset[Edge]
    tt_only: frozenset[Edge]


def edge_sets(cs: CsGraph, tt: TtGraph) -> EdgeSets:
    e_cs = cs.graph.edge_set()
    e_tt = tt.graph.edge_set()
    return EdgeSets(frozenset(e_cs & e_tt), frozenset(e_cs - e_tt), frozenset(e_tt - e_cs))


@dataclass(frozen=True)
class OverlapReport:
    n_common: int
    e_cs: int
    e_tt: int
    o_common: float | None
    o_neg_cs: float | None
    o_neg_tt: float | None
    weight_coverage: float | None = None
    top_weight_share: float | None = None
    undefined: tuple[str, ...] = ()
    definitions: dict[str, str] = field(default_factory=lambda: dict(DEFINITIONS))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["undefined"] = list(self.undefined)
        return d


def overlap(cs: CsGraph, tt: TtGraph, top_q: float | None = 5.0) -> OverlapReport:
    """Overlap percentages between CS and TT edges on a shared node set.

    Call :func:`restrict_common` first; the three percentages use |E_CS|
    (common, not-in-TT) and |E_TT| (not-in-CS) as denominators.
    """
    if set(cs.graph.nodes()) != set(tt.graph.nodes()):
        raise GraphError("overlap needs both graphs on the same node set; call restrict_common first")
    sets = edge_sets(cs, tt)
    n_cs = cs.graph.n_edges
    n_tt = tt.graph.n_edges
    undefined = []
    o_common = o_neg_tt = o_neg_cs = None
    if n_cs:
        o_common = 100.0 * len(sets.common) / n_cs
        o_neg_tt = 100.0 - o_common
    else:
        undefined += ["o_common", "o_neg_tt"]
    if n_tt:
        o_neg_cs = 100.0 * len(sets.tt_only) / n_tt
    else:
        undefined.append("o_neg_cs")
    coverage = share = None
    if cs.weighted and n_cs:
        coverage = weight_coverage(cs, sets.common)
        if top_q is not None and sets.common:
            share = top_weight_share(cs, sets.common, top_q)
    return OverlapReport(
        n_common=cs.graph.n_nodes,
        e_cs=n_cs,
        e_tt=n_tt,
        o_common=o_common,
        o_neg_cs=o_neg_cs,
        o_neg_tt=o_neg_tt,
        weight_coverage=coverage,
        top_weight_share=share,
        undefined=tuple(undefined),
    )


def weight_coverage(cs: CsGraph, common_edges: Iterable[Edge]) -> float:
    """Share of the total CS edge weight carried by ``common_edges``."""
    if not cs.weighted:
        raise GraphError("weights required")
    edges = cs.graph.edges()
    total = math.fsum(w for _, _, w in edges)
    if total == 0:
        raise GraphError("CS graph has no edge weight")
    common = {_edge(a, b) for a, b in common_edges}
    return math.fsum(w for a, b, w in edges if (a, b) in common) / total


def top_weight_share(cs: CsGraph, common_edges: Iterable[Edge], q: float) -> float:
    """Fraction of ``common_edges`` that fall in the heaviest ``q`` percent of CS edges.

    The top set holds ceil(q/100 * |E_CS|) edges; equal weights break by edge name.
    """
    if not cs.weighted:
        raise GraphError("weights required")
    if not 0 < q < 100:
        raise ValueError("q must be in (0, 100)")
    common = {_edge(a, b) for a, b in common_edges}
    if not common:
        raise GraphError("no common edges")
    ranked = sorted(cs.graph.edges(), key=lambda e: (-e[2], e[0], e[1]))
    size = math.ceil(q / 100 * len(ranked))
    top = {(a, b) for a, b, _ in ranked[:size]}
    return len(common & top) / len(common)

from __future__ import annotations

import io
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackgraph.csoverlap import (
    CsGraph,
    edge_sets,
    overlap,
    parse_cs,
    restrict_common,
    top_weight_share,
    weight_coverage,
)
from trackgraph.errors import GraphError, IngestError
from trackgraph.graphcore import Graph
from trackgraph.ttgraph import TtGraph


def cs_of(nodes, edges, weighted=True):
    return CsGraph(Graph(nodes, edges), weighted)


def tt_of(nodes, edges):
    return TtGraph(Graph(nodes, edges))


def parse(text, rules, **kw):
    return parse_cs(io.StringIO(text), rules, **kw)


def test_parse_merge_and_self_loops(rules):
    g = parse("domain_a,domain_b,weight\na.com,b.com,0.5\nb.com,a.com,0.5\nx.a.com,a.com,1\n", rules)
    assert g.graph.edges() == [("a.com", "b.com", 1.0)]
    assert g.self_loops_dropped == 1 and g.weighted


def test_parse_unweighted(rules):
    g = parse("sync.a.com,b.com\nc.com,b.com\n", rules)
    assert not g.weighted and g.graph.n_edges == 2
    assert parse("a.com,b.com\n", rules, assume_unit_weights=True).weighted


@pytest.mark.parametrize("text, msg", [
    ("", "empty"),
    ("domain_a,domain_b,weight\n", "empty"),
    ("a.com,b.com,zero\n", "non-numeric"),
    ("a.com,b.com,-1\n", "positive"),
    ("domain_a,domain_b,weight\na.com,b.com,\n", "missing weight"),
    ("a.com\n", "expected"),
])
def test_parse_errors(rules, text, msg):
    with pytest.raises(IngestError, match=msg):
        parse(text, rules)


def test_parse_counts_at_scale(rules):
    rng = random.Random(2)
    names = [f"t{i}.com" for i in range(4656)]
    edges = set()
    for i in range(1, len(names)):  # spanning tree so every node appears
        edges.add(tuple(sorted((names[i], names[rng.randrange(i)]))))
    while len(edges) < 8582:
        edges.add(tuple(sorted(rng.sample(names, 2))))
    text = "".join(f"{a},{b},{rng.random() + 0.01}\n" for a, b in edges)
    g = parse(text, rules)
    assert (g.graph.n_nodes, g.graph.n_edges) == (4656, 8582)


def test_restrict_common():
    cs = cs_of("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
    tt = tt_of("bcde", [("b", "c"), ("d", "e"), ("b", "d")])
    cs2, tt2, n = restrict_common(cs, tt)
    assert n == 3 and cs2.graph.nodes() == tt2.graph.nodes() == ["b", "c", "d"]
    assert cs2.graph.edge_set() == {("b", "c"), ("c", "d")}
    assert tt2.graph.edge_set() == {("b", "c"), ("b", "d")}
    same, same_tt, _ = restrict_common(cs, tt_of("abcd", []))
    assert same.graph.edges() == cs.graph.edges()
    with pytest.raises(GraphError, match="no common trackers"):
        restrict_common(cs, tt_of("xyz", []))


def test_overlap_examples():
    r = overlap(cs_of("abc", [("a", "b"), ("b", "c")]), tt_of("abc", [("a", "b"), ("a", "c")]))
    assert (r.o_common, r.o_neg_tt, r.o_neg_cs) == (50.0, 50.0, 50.0)
    same = [("a", "b"), ("b", "c")]
    r = overlap(cs_of("abc", same), tt_of("abc", same))
    assert (r.o_common, r.o_neg_cs, r.o_neg_tt) == (100.0, 0.0, 0.0)
    r = overlap(cs_of("abc", [("a", "b")]), tt_of("abc", [("b", "c")]))
    assert (r.o_common, r.o_neg_tt) == (0.0, 100.0)
    r = overlap(cs_of("abc", []), tt_of("abc", [("b", "c")]))
    assert r.o_common is None and "o_common" in r.undefined
    with pytest.raises(GraphError):
        overlap(cs_of("ab", [("a", "b")]), tt_of("abc", []))


def test_weight_coverage():
    cs = cs_of("abcd", [("a", "b", 1), ("b", "c", 1), ("c", "d", 2)])
    assert weight_coverage(cs, cs.graph.edge_set()) == 1.0
    assert weight_coverage(cs, [("d", "c")]) == 0.5
    with pytest.raises(GraphError, match="weights required"):
        weight_coverage(cs_of("ab", [("a", "b")], weighted=False), [])


def test_weight_coverage_heavy_tail():
    nodes = [f"n{i:03d}" for i in range(30)]
    pairs = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]][:200]
    edges = [(a, b, 1000.0 / (i + 1) ** 1.5) for i, (a, b) in enumerate(pairs)]
    cs = cs_of(nodes, edges)
    top = [(a, b) for a, b, _ in edges[:10]]  # top 5% by weight
    cov = weight_coverage(cs, top)
    assert cov > 10 * (len(top) / len(edges))


def test_top_weight_share():
    nodes = [f"n{i:03d}" for i in range(20)]
    pairs = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]][:100]
    edges = [(a, b, float(100 - i)) for i, (a, b) in enumerate(pairs)]
    cs = cs_of(nodes, edges)
    heaviest = [pairs[0], pairs[1]]
    assert top_weight_share(cs, heaviest, 5) == 1.0
    assert top_weight_share(cs, pairs[50:60], 5) == 0.0
    common = pairs[:2] + pairs[60:98]  # 40 overlap edges, 2 in the top 5
    assert top_weight_share(cs, common, 5) == pytest.approx(0.05)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_partition_property(seed):
    rng = random.Random(seed)
    nodes = [f"n{i}" for i in range(rng.randint(3, 12))]
    allp = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
    ecs = [e for e in allp if rng.random() < 0.4] or [allp[0]]
    ett = [e for e in allp if rng.random() < 0.4]
    r = overlap(cs_of(nodes, [(a, b, rng.random() + 0.1) for a, b in ecs]), tt_of(nodes, ett))
    assert r.o_common + r.o_neg_tt == 100.0
    sets = edge_sets(cs_of(nodes, ecs), tt_of(nodes, ett))
    assert len(sets.common) + len(sets.cs_only) == len(ecs)
    assert 0 <= r.weight_coverage <= 1
    if ett:
        assert math.isclose(r.o_neg_cs, 100 * len(sets.tt_only) / len(ett))

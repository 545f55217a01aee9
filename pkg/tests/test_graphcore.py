from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from trackgraph import graphcore as gc
from trackgraph import parallel
from trackgraph.errors import GraphError
from trackgraph.graphcore import Graph, Role


def path(n):
    nodes = [chr(ord("a") + i) for i in range(n)]
    return Graph(nodes, list(zip(nodes, nodes[1:])))


def test_constructor_rejects_bad_edges():
    with pytest.raises(GraphError, match="self-loop"):
        Graph(["a"], [("a", "a")])
    with pytest.raises(GraphError, match="duplicate"):
        Graph([], [("a", "b"), ("b", "a")])
    for w in (0, -1.0, float("nan")):
        with pytest.raises(GraphError):
            Graph([], [("a", "b", w)])


def test_basic_accessors():
    g = Graph({"p": Role.PUBLISHER, "t": "tracker"}, [("t", "p", 3), ("p", "x")])
    assert g.edges() == [("p", "t", 3.0), ("p", "x", 1.0)]
    assert g.role("x") is Role.UNTYPED
    assert g.neighbors("p") == ["t", "x"]
    assert g.total_weight() == 4.0
    assert g.subgraph(["p", "t"]).n_edges == 1


def test_path_metrics():
    g = path(4)
    bc = gc.betweenness(g)
    assert bc == pytest.approx({"a": 0, "b": 2 / 3, "c": 2 / 3, "d": 0})
    assert gc.diameter(g) == 3
    assert gc.degree_centrality(g)["b"] == pytest.approx(2 / 3)


def test_triangle_with_pendant():
    g = Graph([], [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")])
    assert gc.core_numbers(g) == {"a": 2, "b": 2, "c": 2, "d": 1}
    assert gc.coreness(g) == {"a": 1.0, "b": 1.0, "c": 1.0, "d": 0.5}
    assert gc.local_clustering(g) == pytest.approx({"a": 1, "b": 1, "c": 1 / 3, "d": 0})


def test_density_modes():
    k33 = Graph({**{f"p{i}": "publisher" for i in range(3)}, **{f"t{i}": "tracker" for i in range(3)}},
                [(f"p{i}", f"t{j}") for i in range(3) for j in range(3)])
    assert gc.density(k33, "bipartite") == 1.0
    assert gc.density(k33) == pytest.approx(9 / 15)
    assert gc.avg_clustering(k33) == 0.0
    assert gc.avg_redundancy(k33) == pytest.approx(1.0)


def test_redundancy_star_is_zero():
    star = Graph({"p": "publisher", "t1": "tracker", "t2": "tracker"}, [("p", "t1"), ("p", "t2")])
    assert gc.redundancy(star)["p"] == 0.0


def test_lcc_tie_break_and_errors():
    g = Graph(["z"], [("m", "n"), ("b", "c")])
    assert gc.lcc(g).nodes() == ["b", "c"]
    with pytest.raises(GraphError, match="lcc"):
        gc.diameter(g)
    with pytest.raises(GraphError):
        gc.norm_avg_weight(Graph(["a"]))


def test_norm_avg_weight():
    g = Graph([], [("a", "b", 2), ("b", "c", 4)])
    assert gc.norm_avg_weight(g) == 0.75


def test_pearson_exact_and_errors():
    assert gc.pearson([1, 2, 3], [3, 2, 1]) == (-1.0, 0.0)
    assert gc.pearson([1, 2, 3, 4], [2, 4, 6, 8]) == (1.0, 0.0)
    with pytest.raises(GraphError, match="constant"):
        gc.pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(GraphError):
        gc.pearson([1, 2], [1, 2])


def test_pearson_p_value_matches_scipy():
    from scipy import stats

    rng = random.Random(3)
    xs = [rng.random() for _ in range(30)]
    ys = [x + rng.gauss(0, 0.5) for x in xs]
    r, p = gc.pearson(xs, ys)
    ref = stats.pearsonr(xs, ys)
    assert r == pytest.approx(ref[0], abs=1e-12)
    assert p == pytest.approx(ref[1], rel=1e-9)


graphs = st.builds(
    lambda seed, n, p: oracles.random_graph(random.Random(seed), n, p),
    st.integers(0, 10**6), st.integers(1, 14), st.floats(0.05, 0.9),
)


@settings(max_examples=80, deadline=None)
@given(graphs)
def test_metrics_match_oracles(nodes_edges):
    nodes, edges = nodes_edges
    g = Graph(nodes, edges)
    bc = gc.betweenness(g)
    ref = oracles.betweenness_bruteforce(nodes, edges)
    for v in nodes:
        assert math.isclose(bc[v], ref[v], abs_tol=1e-12)
    assert gc.core_numbers(g) == oracles.core_numbers_bruteforce(nodes, edges)
    assert gc.avg_clustering(g) == pytest.approx(oracles.avg_clustering_bruteforce(nodes, edges), abs=1e-12)
    comps = sorted(sorted(c) for c in gc.connected_components(g))
    assert comps == sorted(sorted(c) for c in oracles.components_union_find(nodes, edges))
    big = gc.lcc(g)
    assert len(big.nodes()) == max(len(c) for c in comps)
    assert set(big.nodes()) == set(min((c for c in comps if len(c) == big.n_nodes), key=min))
    if big.n_nodes > 1:
        assert gc.diameter(big) == oracles.diameter_bruteforce(big.nodes(), big.edges())
    assert all(0 <= x <= 1 for x in bc.values())


@settings(max_examples=40, deadline=None)
@given(graphs, st.randoms(use_true_random=False))
def test_relabelling_invariance(nodes_edges, rnd):
    nodes, edges = nodes_edges
    perm = nodes[:]
    rnd.shuffle(perm)
    m = dict(zip(nodes, perm))
    g1 = Graph(nodes, edges)
    g2 = Graph(perm, [(m[a], m[b]) for a, b in edges])
    b1, b2 = gc.betweenness(g1), gc.betweenness(g2)
    c1, c2 = gc.core_numbers(g1), gc.core_numbers(g2)
    for v in nodes:
        assert b1[v] == pytest.approx(b2[m[v]], abs=1e-12)
        assert c1[v] == c2[m[v]]


def _big_graph():
    nodes, edges = oracles.random_connected_graph(random.Random(11), 1100, 0.0)
    rng = random.Random(12)
    extra = set(edges)
    while len(extra) < len(edges) + 1500:
        a, b = sorted(rng.sample(nodes, 2))
        extra.add((a, b))
    return Graph(nodes, sorted(extra))


def test_parallel_is_bit_identical(monkeypatch):
    g = _big_graph()
    monkeypatch.setenv("TRACKGRAPH_THREADS", "1")
    serial = (gc.betweenness(g), gc.diameter(g))
    monkeypatch.setenv("TRACKGRAPH_THREADS", "2")
    assert parallel.worker_count() == 2 and g.n_nodes >= parallel.MIN_PARALLEL_SOURCES
    par = (gc.betweenness(Graph(g.nodes(), g.edges())), gc.diameter(g))
    assert serial == par  # exact float equality, not approx


@settings(max_examples=60, deadline=None)
@given(graphs, st.floats(0.01, 100), st.integers(0, 10**6))
def test_spec_invariants(nodes_edges, scale, seed):
    nodes, edges = nodes_edges
    rng = random.Random(seed)
    weighted = [(a, b, rng.uniform(0.1, 10)) for a, b in edges]
    g = Graph(nodes, weighted)
    big = gc.lcc(g)
    assert gc.lcc(big).edges() == big.edges()  # idempotent
    # k-core is unweighted; degree centrality ignores weights
    rescaled = Graph(nodes, [(a, b, w * scale) for a, b, w in weighted])
    assert gc.coreness(g) == gc.coreness(rescaled) == gc.coreness(Graph(nodes, edges))
    if len(nodes) >= 2:
        dc1, dc2 = gc.degree_centrality(g), gc.degree_centrality(rescaled)
        assert max(sorted(dc1), key=dc1.get) == max(sorted(dc2), key=dc2.get)
        assert 0.0 <= gc.density(g) <= 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 10**6))
def test_bipartite_invariants(n_pub, n_trk, seed):
    rng = random.Random(seed)
    roles = {**{f"p{i}": "publisher" for i in range(n_pub)}, **{f"t{j}": "tracker" for j in range(n_trk)}}
    full = [(f"p{i}", f"t{j}") for i in range(n_pub) for j in range(n_trk)]
    some = [e for e in full if rng.random() < 0.5]
    assert gc.avg_clustering(Graph(roles, some)) == 0.0
    assert 0.0 <= gc.density(Graph(roles, some), "bipartite") <= 1.0
    assert gc.density(Graph(roles, full), "bipartite") == 1.0
    k = Graph(list(roles), [(a, b) for i, a in enumerate(roles) for b in list(roles)[i + 1:]])
    if k.n_nodes >= 2:
        assert gc.density(k) == 1.0

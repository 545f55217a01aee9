from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import rec, snap
from trackgraph.errors import GraphError
from trackgraph.longitudinal import LEGEND, align, parse_date_label, relative_change, topk_stability, trend_table
from trackgraph.ptgraph import RankEntry, TrackerRanking


def pubsnap(sid, label, pubs):
    return snap([rec(p, f"https://{p}/", "document", sid) for p in pubs], sid, label)


def ranking(names, cov=None):
    cov = cov or {}
    return TrackerRanking("degree", tuple(RankEntry(n, 1.0 / (i + 1), cov.get(n, 10.0), n) for i, n in enumerate(names)))


def test_align_examples(rules):
    a = pubsnap("s1", "Sep17", ["a.com", "b.com", "www.c.com"])
    b = pubsnap("s2", "Apr19", ["b.com", "c.com", "d.com"])
    series = align([b, a], rules)
    assert series.common_publishers == {"b.com", "c.com"}
    assert [s.id for s in series.snapshots] == ["s1", "s2"]  # chronological
    same = align([a, a.replace_records(a.records)], rules)
    assert same.common_publishers == {"a.com", "b.com", "c.com"}
    with pytest.raises(GraphError):
        align([a, pubsnap("s3", "x", ["z.com"])], rules)
    with pytest.raises(GraphError):
        align([a], rules)


def test_align_six_snapshots(rules):
    rng = random.Random(4)
    core = [f"c{i}.com" for i in range(5100)]
    extra = [f"x{i}.com" for i in range(8311 - 5100)]
    snaps = []
    for i, label in enumerate(["Sep17", "Mar18", "Jul18", "Oct18", "Jan19", "Apr19"]):
        # every extra publisher misses at least snapshot j % 6
        pubs = core + [e for j, e in enumerate(extra) if j % 6 != i and rng.random() < 0.8]
        snaps.append(pubsnap(f"s{i}", label, pubs))
    assert len(align(snaps, rules).common_publishers) == 5100


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sets(st.sampled_from("abcdef"), min_size=1), min_size=2, max_size=4))
def test_align_order_insensitive(rules, sets):
    snaps = [pubsnap(f"s{i}", f"l{i}", [f"{x}.com" for x in sorted(s) + ["z"]]) for i, s in enumerate(sets)]
    ref = align(snaps, rules).common_publishers
    for perm in itertools.permutations(snaps):
        assert align(list(perm), rules).common_publishers == ref
    for s in align(snaps, rules).snapshots:
        assert {r.publisher_host for r in s.records} == ref


def test_parse_date_label():
    assert parse_date_label("Sep17").year == 2017
    assert parse_date_label("2019-04-01").month == 4
    assert parse_date_label("snapshot-a") is None


def test_trend_examples():
    assert trend_table([("a", 10), ("b", 9.1)]).change_pct == pytest.approx(-9.0)
    assert trend_table([("a", 3), ("b", 3)]).change_pct == 0.0
    assert trend_table([("a", 4), ("b", 8)]).change_pct == 100.0
    assert relative_change(0, 5) is None


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 1e6), st.floats(0, 1e6), st.floats(0.01, 1000))
def test_trend_rescaling(first, last, scale):
    a = relative_change(first, last)
    b = relative_change(first * scale, last * scale)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)
    assert a == pytest.approx((last - first) / first * 100)


def test_stability_legend():
    filler = [f"f{i:02d}" for i in range(40)]
    k = 25
    snaps = []
    for i in range(6):
        names = ["always"] + filler[:]
        names.insert(3 if i < 5 else 39, "dropper")
        if i == 5:
            names.insert(5, "climber")
        else:
            names.append("climber")  # present but below the cut
        snaps.append(ranking(names))
    rep = topk_stability(snaps, k)
    cls = rep.classes()
    assert (cls["always"], cls["dropper"], cls["climber"]) == ("stable", "dropped", "climbed")
    sym = {e.tracker: e.symbol for e in rep.entries}
    assert (sym["always"], sym["dropper"], sym["climber"]) == ("(*)", "(+/-)", "(+)")
    assert set(cls.values()) <= set(LEGEND)


def test_stability_absent_counts_zero_coverage():
    r1 = ranking(["a", "b"], {"a": 50.0, "b": 40.0})
    r2 = ranking(["a"], {"a": 30.0})
    rep = topk_stability([r1, r2], 1)
    e = {x.tracker: x for x in rep.entries}
    assert e["a"].avg_coverage == 40.0 and e["a"].cls == "stable"
    rep = topk_stability([r1, r2], 2)
    e = {x.tracker: x for x in rep.entries}
    assert e["b"].ranks == (2, None) and e["b"].avg_coverage == 20.0 and e["b"].cls == "dropped"


def test_stability_errors():
    with pytest.raises(GraphError):
        topk_stability([ranking(["a"])], 1)
    with pytest.raises(GraphError):
        topk_stability([ranking(["a"]), ranking(["a", "b"])], 3)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.permutations([f"t{i}" for i in range(8)]), min_size=2, max_size=6), st.integers(1, 6))
def test_stability_classes_partition(orders, k):
    rankings = [ranking(list(o)[: 5 + i % 3]) for i, o in enumerate(orders)]
    rep = topk_stability(rankings, k)
    listed = {t for r in rankings for t in r.names()[:k]}
    assert sorted(e.tracker for e in rep.entries) == sorted(listed)
    for e in rep.entries:
        inside = [r is not None and r <= k for r in e.ranks]
        if e.cls == "stable":
            assert all(inside)
        elif e.cls == "climbed":
            assert not inside[0] and inside[-1]
        elif e.cls == "dropped":
            assert not inside[-1]

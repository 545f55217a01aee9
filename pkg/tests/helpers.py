"""Small builders for crawl records and tracker lists used across tests."""

from __future__ import annotations

import json
import random

from trackgraph.ingest import CrawlRecord, Snapshot, TrackerList


def rec(pub: str, url: str, kind: str = "script", sid: str = "s1") -> CrawlRecord:
    scheme, rest = url.split("://", 1)
    host, _, path = rest.partition("/")
    return CrawlRecord(sid, pub, host, "/" + path, scheme, kind)


def snap(records, sid: str = "s1", label: str | None = None) -> Snapshot:
    return Snapshot(sid, label or sid, tuple(records))


def trackers(*domains: str, version: str = "t") -> TrackerList:
    return TrackerList(version, frozenset(domains))


def log_line(pub: str, url: str, kind: str = "script", sid: str = "s1") -> str:
    return json.dumps({"snapshot": sid, "publisher": pub, "request": url, "kind": kind})


def random_snapshot(rng: random.Random, n_pub: int = 12, n_trk: int = 8, sid: str = "s1"):
    """A crawl with random publishers, tracker subdomains and some non-tracker traffic."""
    trk = [f"trk{i}.com" for i in range(n_trk)]
    pubs = [f"pub{i}.{rng.choice(['com', 'co.uk', 'org'])}" for i in range(n_pub)]
    records = []
    for p in pubs:
        host = rng.choice(["", "www."]) + p
        records.append(rec(host, f"https://{host}/", "document", sid))
        for t in trk:
            if rng.random() < 0.35:
                for _ in range(rng.randint(1, 4)):
                    sub = rng.choice(["", "cdn.", "px."])
                    kind = rng.choice(["script", "image", "xhr", "other"])
                    records.append(rec(host, f"https://{sub}{t}/x", kind, sid))
        if rng.random() < 0.5:
            records.append(rec(host, "https://cdnlib.net/lib.js", "script", sid))
    rng.shuffle(records)
    return snap(records, sid), trackers(*trk)

"""A small synthetic two-snapshot corpus for trying the pipeline end to end.

The bundled files under ``data/demo`` were produced by :func:`generate` with
the default seed; ``trackgraph demo DIR`` copies them out.
"""

from __future__ import annotations

import json
import random
import shutil
from importlib import resources
from pathlib import Path

DEMO_FILES = (
    "Sep17.jsonl",
    "Apr19.jsonl",
    "trackers_2017.txt",
    "trackers_2019.json",
    "orgs.csv",
    "cs_weighted.csv",
    "cs_pairs.csv",
    "config.json",
)

# (domain, organization, popularity in 2017, popularity in 2019)
TRACKERS = [
    ("google-analytics.com", "Google", 0.85, 0.85),
    ("doubleclick.net", "Google", 0.70, 0.72),
    ("googletagmanager.com", "Google", 0.40, 0.50),
    ("facebook.net", "Facebook", 0.45, 0.45),
    ("facebook.com", "Facebook", 0.40, 0.42),
    ("criteo.com", "Criteo", 0.25, 0.22),
    ("adnxs.com", "App Nexus", 0.30, 0.25),
    ("scorecardresearch.com", "comScore", 0.20, 0.18),
    ("quantserve.com", "Quantcast", 0.30, 0.05),
    ("twitter.com", "Twitter", 0.20, 0.18),
    ("taboola.com", "Taboola", 0.15, 0.10),
    ("rubiconproject.com", "Rubicon", 0.15, 0.15),
    ("pubmatic.com", "Pubmatic", 0.12, 0.14),
    ("openx.net", "OpenX", 0.10, 0.10),
    ("demdex.net", "Adobe", 0.00, 0.35),
    ("rarecounter.net", "Rare Counter", 0.00, 0.00),
]
# publishers that embed only the rare tracker and so fall outside the LCC
ISOLATED = {"bookworm.com": "rarecounter.net"}
SUBDOMAINS = ("", "www.", "cdn.", "stats.", "ads.")
OTHER_THIRD_PARTIES = ("jsdelivr.net", "fonts-cdn.org", "cloudflare-static.com")
PUBLISHERS = [f"{name}.{tld}" for name, tld in zip(
    ["dailynews", "sportcentral", "techweekly", "recipebox", "travelhub", "moviebuff",
     "financetoday", "gamerzone", "healthline", "autotrader", "weatherly", "musicstream",
     "shopmart", "localpaper", "sciencedaily", "fashionista", "bookworm", "petcare",
     "homedecor", "jobfinder", "plainsite", "oldportal"],
    ["com", "com", "co.uk", "com", "de", "com", "com", "net", "org", "com", "com", "fr",
     "com", "co.uk", "org", "it", "com", "com", "es", "com", "org", "com"],
)]


def _snapshot_lines(rng: random.Random, snapshot: str, year_idx: int) -> list[str]:
    lines = []
    pubs = PUBLISHERS[:20] + (["oldportal.com"] if year_idx == 0 else ["plainsite.org"])
    https_p = 0.6 if year_idx == 0 else 0.9
    for pub in pubs:
        scheme = "https" if rng.random() < https_p else "http"
        host = "www." + pub if rng.random() < 0.5 else pub

        def emit(url: str, kind: str) -> None:
            lines.append(json.dumps({"snapshot": snapshot, "publisher": host, "request": url, "kind": kind}))

        emit(f"{scheme}://{host}/", "document")
        for i in range(rng.randint(1, 3)):
            emit(f"{scheme}://static.{pub}/asset{i}.png", "image")
        if pub == "plainsite.org":
            continue  # embeds no trackers
        if pub in ISOLATED:
            chosen = [ISOLATED[pub]]
        else:
            chosen = [t[0] for t in TRACKERS if rng.random() < t[2 + year_idx]] or [TRACKERS[0][0]]
        for domain in chosen:
            for _ in range(rng.randint(1, 3)):
                sub = rng.choice(SUBDOMAINS)
                kind = rng.choice(("script", "script", "image", "xhr", "other"))
                ext = "js" if kind == "script" else "gif"
                emit(f"https://{sub}{domain}/t{rng.randint(0, 9)}.{ext}", kind)
        for other in OTHER_THIRD_PARTIES:
            if rng.random() < 0.3:
                emit(f"https://{other}/lib.js", "script")
    lines.insert(len(lines) // 2, "{not valid json")
    return lines


def generate(dest: str | Path, seed: int = 7) -> list[Path]:
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    files = {}
    for idx, sid in enumerate(("Sep17", "Apr19")):
        files[f"{sid}.jsonl"] = "\n".join(_snapshot_lines(rng, sid, idx)) + "\n"
    files["trackers_2017.txt"] = "# demo tracker list, 2017\n" + "".join(
        f"{d}\n" for d, _, p, _ in TRACKERS if p > 0 or d in ISOLATED.values()
    )
    categories: dict[str, list] = {"Advertising": [], "Analytics": []}
    for d, org, _, p in TRACKERS:
        if p > 0 or d in ISOLATED.values():
            cat = "Analytics" if d in ("google-analytics.com", "scorecardresearch.com") else "Advertising"
            categories[cat].append({org: {f"https://{org.lower().replace(' ', '')}.example/": [d]}})
    files["trackers_2019.json"] = json.dumps({"license": "demo", "categories": categories}, indent=2) + "\n"
    files["orgs.csv"] = "domain,organization\n" + "".join(f"{d},{org}\n" for d, org, _, _ in TRACKERS)
    names = [d for d, *_ in TRACKERS]
    weighted = ["domain_a,domain_b,weight"]
    for _ in range(30):
        a, b = rng.sample(names + ["mathtag.com", "rlcdn.com"], 2)
        weighted.append(f"{a},{b},{rng.choice([0.01, 0.02, 0.05, 0.1, 0.3])}")
    files["cs_weighted.csv"] = "\n".join(weighted) + "\n"
    pairs = ["domain_a,domain_b"]
    for _ in range(15):
        a, b = rng.sample(names, 2)
        pairs.append(f"sync.{a},{b}")
    files["cs_pairs.csv"] = "\n".join(pairs) + "\n"
    config = {
        "snapshots": [
            {"id": "Sep17", "date_label": "Sep17", "log": "Sep17.jsonl", "tracker_list": "trackers_2017.txt"},
            {"id": "Apr19", "date_label": "Apr19", "log": "Apr19.jsonl", "tracker_list": "trackers_2019.json"},
        ],
        "cs": [
            {"name": "cs_weighted", "path": "cs_weighted.csv"},
            {"name": "cs_pairs", "path": "cs_pairs.csv"},
        ],
        "org_map": "orgs.csv",
        "output_dir": "out",
        "theta": 2,
        "top_k": 10,
        "seed": seed,
    }
    files["config.json"] = json.dumps(config, indent=2) + "\n"
    written = []
    for name in DEMO_FILES:
        path = dest / name
        path.write_text(files[name], encoding="utf-8")
        written.append(path)
    return written


def bundled_dir():
    return resources.files("trackgraph").joinpath("data/demo")


def write_demo(dest: str | Path) -> list[Path]:
    """Copy the bundled demo corpus into ``dest``."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    out = []
    src = bundled_dir()
    for name in DEMO_FILES:
        with resources.as_file(src.joinpath(name)) as p:
            shutil.copyfile(p, dest / name)
        out.append(dest / name)
    return out

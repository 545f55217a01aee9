"""Command-line entry point.

    trackgraph all --config run.json [--out DIR]
    trackgraph ingest|netstats|pt --log LOG --trackers LIST --out DIR
    trackgraph tt --pt-edges E --pt-nodes N --out DIR
    trackgraph overlap --cs CS --tt E [--tt-nodes N] --out DIR
    trackgraph evolve --manifest run.json --out DIR
    trackgraph demo DIR

Exit codes: 0 success, 2 input/parse error, 3 graph/metric error, 4 config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from functools import cached_property
from pathlib import Path
from typing import Sequence

from . import __version__, demo
from .config import CsSpec, RunConfig, SnapshotSpec, load_config
from .csoverlap import CsGraph, edge_sets, load_cs, overlap, restrict_common
from .errors import ConfigError, GraphError, TrackgraphError
from .graphcore import GraphSummary, Role
from .ingest import (
    Snapshot,
    TrackerList,
    classify_snapshot,
    dump_crawl_log,
    filter_publishers,
    load_org_map,
    load_tracker_list,
    publishers,
    read_crawl_log,
)
from .longitudinal import align, topk_stability, trend_table
from .netstats import PANELS, activity_summary, cdf, https_adoption, nearest_rank, publisher_activity
from .ptgraph import PtGraph, build_pt, metric_correlations, pt_node_metrics, pt_summary, top_k
from .report import OutputWriter, frac, num, pct, read_graph, round_floats, sha256_file, write_graph
from .suffix import SuffixRules
from .ttgraph import TtGraph, build_tt, tt_summary

log = logging.getLogger("trackgraph")


class Pipeline:
    """Lazily computes every stage once per snapshot and writes the requested outputs."""

    def __init__(self, cfg: RunConfig, out: OutputWriter) -> None:
        self.cfg = cfg
        self.out = out
        self._cache: dict[tuple[str, str], object] = {}

    def _memo(self, key: tuple[str, str], fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @cached_property
    def rules(self) -> SuffixRules:
        if self.cfg.suffix_list:
            return SuffixRules.load(self.cfg.resolve(self.cfg.suffix_list))
        return SuffixRules.default()

    @cached_property
    def orgs(self) -> dict[str, str]:
        if not self.cfg.org_map:
            return {}
        return load_org_map(self.cfg.resolve(self.cfg.org_map), self.rules)

    def trackers(self, spec: SnapshotSpec) -> TrackerList:
        return self._memo(
            ("trackers", spec.id),
            lambda: load_tracker_list(self.cfg.resolve(spec.tracker_list), self.rules, spec.tracker_list_version),
        )

    def labels(self, spec: SnapshotSpec) -> dict[str, str]:
        return {**self.trackers(spec).organizations, **self.orgs}

    def raw(self, spec: SnapshotSpec) -> tuple[Snapshot, int]:
        def load():
            parsed = read_crawl_log(self.cfg.resolve(spec.log), spec.id)
            snap = Snapshot(spec.id, spec.date_label, tuple(parsed.records), spec.tracker_list_version)
            return snap, parsed.skipped
        return self._memo(("raw", spec.id), load)

    def filtered(self, spec: SnapshotSpec) -> Snapshot:
        return self._memo(
            ("filtered", spec.id),
            lambda: filter_publishers(self.raw(spec)[0], self.trackers(spec), self.rules),
        )

    @cached_property
    def aligned(self) -> dict[str, Snapshot]:
        snaps = [self.filtered(s) for s in self.cfg.snapshots]
        if self.cfg.align_publishers and len(snaps) >= 2:
            series = align(snaps, self.rules)
            return {s.id: s for s in series.snapshots}
        return {s.id: s for s in snaps}

    @cached_property
    def chronological(self) -> list[SnapshotSpec]:
        by_id = {s.id: s for s in self.cfg.snapshots}
        return [by_id[sid] for sid in self.aligned]

    def snapshot(self, spec: SnapshotSpec) -> Snapshot:
        return self.aligned[spec.id]

    def activity(self, spec: SnapshotSpec):
        return self._memo(
            ("activity", spec.id),
            lambda: publisher_activity(self.snapshot(spec), self.trackers(spec), self.rules),
        )

    def https(self, spec: SnapshotSpec) -> float | None:
        snap = self.snapshot(spec)
        return https_adoption(snap, self.rules) if snap.records else None

    def pt(self, spec: SnapshotSpec) -> PtGraph:
        def make():
            g = build_pt(self.snapshot(spec), self.trackers(spec), self.rules)
            if g.graph.n_edges == 0:
                raise GraphError(f"snapshot {spec.id}: no publishers with trackers")
            return g
        return self._memo(("pt", spec.id), make)

    def pt_metrics(self, spec: SnapshotSpec):
        return self._memo(("ptm", spec.id), lambda: pt_node_metrics(self.pt(spec)))

    def pt_summary(self, spec: SnapshotSpec) -> GraphSummary:
        return self._memo(("pts", spec.id), lambda: pt_summary(self.pt(spec), self.cfg.redundancy))

    def ranking(self, spec: SnapshotSpec, metric: str, k: int | None):
        return self._memo(
            (f"rank-{metric}-{k}", spec.id),
            lambda: top_k(self.pt(spec), metric, k, self.labels(spec), self.pt_metrics(spec)),
        )

    def tt(self, spec: SnapshotSpec) -> TtGraph:
        return self._memo(("tt", spec.id), lambda: build_tt(self.pt(spec).lcc(), self.cfg.theta))

    def tt_summary(self, spec: SnapshotSpec) -> GraphSummary:
        return self._memo(("tts", spec.id), lambda: tt_summary(self.tt(spec)))

    def cs_graph(self, spec: CsSpec) -> CsGraph:
        return self._memo(
            ("cs", spec.name),
            lambda: load_cs(self.cfg.resolve(spec.path), self.rules, spec.assume_unit_weights),
        )

    # -- stage writers -----------------------------------------------------

    def write_ingest(self, spec: SnapshotSpec) -> None:
        raw, skipped = self.raw(spec)
        trackers = self.trackers(spec)
        classified = classify_snapshot(raw, trackers, self.rules)
        snap = self.snapshot(spec)
        self.out.text(f"{spec.id}/records.jsonl", dump_crawl_log(snap.records))
        self.out.json(f"{spec.id}/ingest.json", {
            "snapshot": spec.id,
            "date_label": spec.date_label,
            "tracker_list_version": trackers.version,
            "tracker_domains": len(trackers),
            "records": len(raw.records),
            "skipped_lines": skipped,
            "anomalous_records": classified.anomalies,
            "classes": classified.counts(),
            "publishers_total": len(publishers(raw, self.rules)),
            "publishers_with_trackers": len(publishers(self.filtered(spec), self.rules)),
            "publishers_retained": len(publishers(snap, self.rules)),
            "records_retained": len(snap.records),
        })

    def write_netstats(self, spec: SnapshotSpec) -> None:
        act = self.activity(spec)
        if not act:
            raise GraphError(f"snapshot {spec.id}: no publishers with trackers")
        base = f"{spec.id}/netstats"
        for panel in PANELS:
            vals = [(p, getattr(a, panel)) for p, a in act.items()]
            self.out.csv(f"{base}/{panel}.csv", ["publisher", "value"], [[p, num(v)] for p, v in vals])
            series = cdf(v for _, v in vals)
            self.out.csv(f"{base}/{panel}_cdf.csv", ["value", "fraction"], [[num(x), frac(f)] for x, f in series])
        self.out.json(f"{base}/summary.json", round_floats(activity_summary(act, self.https(spec))))

    def write_pt(self, spec: SnapshotSpec) -> None:
        pt = self.pt(spec)
        base = f"{spec.id}/pt"
        write_graph(self.out, f"{base}/", pt.graph, publisher_first=True)
        summary = self.pt_summary(spec)
        nm = self.pt_metrics(spec)
        self.out.json(f"{base}/summary.json", round_floats({**summary.to_dict(), "dropped_nodes": len(nm.dropped)}))
        self.out.csv(f"{base}/dropped.csv", ["node", "role"], [[v, pt.graph.role(v).value] for v in nm.dropped])
        self.out.csv(
            f"{base}/node_metrics.csv",
            ["node", "degree", "betweenness", "coreness"],
            [[v, frac(m.degree_centrality), frac(m.betweenness), frac(m.coreness)] for v, m in nm.metrics.items()],
        )
        for (role, metric), series in nm.cdfs().items():
            self.out.csv(f"{base}/cdf_{role}_{metric}.csv", ["value", "fraction"], [[frac(x), frac(f)] for x, f in series])
        corr = {"significance_threshold": 0.009}
        for role in (Role.PUBLISHER, Role.TRACKER):
            try:
                rows = metric_correlations(nm, role)
            except GraphError as exc:
                corr[role.value] = {"error": str(exc)}
                continue
            corr[role.value] = {
                c.pair: {"r": c.r, "p": c.p, "defined": c.defined, "significant": c.significant}
                for c in rows
            }
        self.out.json(f"{base}/correlations.json", round_floats(corr))
        for metric in ("degree", "betweenness"):
            ranking = self.ranking(spec, metric, self.cfg.top_k)
            self.out.csv(
                f"{base}/ranking_{metric}.csv",
                ["rank", "tracker", "organization", metric, "publishers_pct"],
                [[i, e.tracker, e.organization, frac(e.value), pct(e.coverage)] for i, e in enumerate(ranking, 1)],
            )

    def write_tt(self, spec: SnapshotSpec) -> None:
        tt = self.tt(spec)
        base = f"{spec.id}/tt"
        write_graph(self.out, f"{base}/", tt.graph)
        self.out.json(f"{base}/summary.json", round_floats({**self.tt_summary(spec).to_dict(), "theta": tt.theta}))

    def write_overlap(self, spec: SnapshotSpec, cs_spec: CsSpec) -> None:
        write_overlap(self.out, f"{spec.id}/overlap/{cs_spec.name}", self.cs_graph(cs_spec), self.tt(spec), self.cfg.top_q)

    def write_evolve(self) -> None:
        specs = self.chronological
        if len(specs) < 2:
            raise GraphError("evolve needs at least 2 snapshots")
        rows = []
        for panel in PANELS:
            for q, tag in ((50, "median"), (90, "p90")):
                rows.append((f"{panel}_{tag}", [
                    nearest_rank([getattr(a, panel) for a in self.activity(s).values()], q) for s in specs
                ]))
        rows.append(("https_adoption", [self.https(s) for s in specs]))
        self._trend_csv("evolve/trends_netstats.csv", specs, rows)
        fields = ("n_nodes", "n_edges", "norm_avg_weight", "avg_clustering", "density", "diameter")
        self._trend_csv("evolve/trends_pt.csv", specs,
                        [(f, [getattr(self.pt_summary(s), f) for s in specs]) for f in fields])
        self._trend_csv("evolve/trends_tt.csv", specs,
                        [(f, [getattr(self.tt_summary(s), f) for s in specs]) for f in fields])
        for metric in ("degree", "betweenness"):
            report = topk_stability([self.ranking(s, metric, None) for s in specs], self.cfg.top_k)
            self.out.csv(
                f"evolve/stability_{metric}.csv",
                ["legend", "tracker", "organization", "class"] + [f"rank_{s.id}" for s in specs] + ["avg_publishers_pct"],
                [
                    [e.symbol, e.tracker, e.organization, e.cls]
                    + ["" if r is None else r for r in e.ranks]
                    + [pct(e.avg_coverage)]
                    for e in report.entries
                ],
            )

    def _trend_csv(self, rel: str, specs: Sequence[SnapshotSpec], rows) -> None:
        out_rows = []
        for name, values in rows:
            if any(v is None for v in values):
                continue
            trend = trend_table([(s.id, v) for s, v in zip(specs, values)], name=name)
            out_rows.append([name] + [num(v) for _, v in trend.values] + [pct(trend.change_pct)])
        self.out.csv(rel, ["metric"] + [s.id for s in specs] + ["change_pct"], out_rows)


def write_overlap(out: OutputWriter, prefix: str, cs: CsGraph, tt: TtGraph, top_q: float) -> None:
    cs_c, tt_c, n_common = restrict_common(cs, tt)
    report = overlap(cs_c, tt_c, top_q)
    payload = report.to_dict()
    for key in ("o_common", "o_neg_cs", "o_neg_tt"):
        if payload[key] is not None:
            payload[key] = round(payload[key], 2)
    payload = round_floats(payload)
    payload.update({
        "cs_nodes": cs.graph.n_nodes,
        "cs_edges": cs.graph.n_edges,
        "cs_self_loops_dropped": cs.self_loops_dropped,
        "cs_weighted": cs.weighted,
        "tt_nodes": tt.graph.n_nodes,
        "tt_edges": tt.graph.n_edges,
        "top_q": top_q,
    })
    out.json(f"{prefix}.json", payload)
    sets = edge_sets(cs_c, tt_c)
    rows = []
    for name, edges in (("common", sets.common), ("cs_only", sets.cs_only), ("tt_only", sets.tt_only)):
        for a, b in sorted(edges):
            cw = num(cs_c.graph.weight(a, b)) if cs_c.graph.has_edge(a, b) and cs.weighted else ""
            tw = num(tt_c.graph.weight(a, b)) if tt_c.graph.has_edge(a, b) else ""
            rows.append([name, a, b, cw, tw])
    out.csv(f"{prefix}_edges.csv", ["set", "node_a", "node_b", "cs_weight", "tt_weight"], rows)


# -- argument handling ------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--suffix-list", help="public suffix list file")
    p.add_argument("--org-map", help="domain,organization CSV for labels")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_snapshot(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log", help="crawl log (JSON Lines)")
    p.add_argument("--trackers", help="tracker list (text or Disconnect JSON)")
    p.add_argument("--snapshot-id", help="snapshot id (default: log file stem)")
    p.add_argument("--date-label", default="")


def _add_metric_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-cooccurrence", type=int, dest="theta", help="TT edge threshold (default 2)")
    p.add_argument("--top-k", type=int, help="ranking length (default 25)")
    p.add_argument("--top-q", type=float, help="CS heavy-edge percentile (default 5)")
    p.add_argument("--no-redundancy", action="store_true", help="skip the bipartite redundancy coefficient")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trackgraph", description="Publisher/tracker graph analysis of crawl logs.")
    parser.add_argument("--version", action="version", version=f"trackgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ingest", "netstats", "pt", "all"):
        p = sub.add_parser(name)
        _add_common(p)
        _add_snapshot(p)
        _add_metric_opts(p)
        if name == "all":
            p.add_argument("--cs", action="append", default=[], help="CS ground-truth CSV (repeatable)")
    p = sub.add_parser("tt")
    _add_common(p)
    _add_snapshot(p)
    _add_metric_opts(p)
    p.add_argument("--pt-edges", help="PT edge list CSV")
    p.add_argument("--pt-nodes", help="PT node-role CSV")
    p = sub.add_parser("overlap")
    _add_common(p)
    _add_snapshot(p)
    _add_metric_opts(p)
    p.add_argument("--cs", action="append", default=[], help="CS ground-truth CSV")
    p.add_argument("--tt", help="TT edge list CSV")
    p.add_argument("--tt-nodes", help="TT node CSV (keeps isolated trackers)")
    p.add_argument("--assume-unit-weights", action="store_true", help="treat a weightless CS file as weight 1")
    p = sub.add_parser("evolve")
    _add_common(p)
    _add_metric_opts(p)
    p.add_argument("--manifest", help="run configuration listing snapshots in chronological order")
    p = sub.add_parser("demo", help="write the bundled demo corpus")
    p.add_argument("dest")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg_path = getattr(args, "config", None) or getattr(args, "manifest", None)
    cfg = load_config(cfg_path) if cfg_path else RunConfig()
    if getattr(args, "log", None):
        if not args.trackers:
            raise ConfigError("--log requires --trackers")
        sid = args.snapshot_id or Path(args.log).stem
        cfg.snapshots = [SnapshotSpec(sid, str(Path(args.log).resolve()), str(Path(args.trackers).resolve()), args.date_label)]
    for opt, attr in (("suffix_list", "suffix_list"), ("org_map", "org_map")):
        val = getattr(args, opt, None)
        if val:
            setattr(cfg, attr, str(Path(val).resolve()))
    for attr in ("theta", "top_k", "top_q"):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, attr, val)
    if getattr(args, "no_redundancy", False):
        cfg.redundancy = False
    for path in getattr(args, "cs", None) or []:
        name = Path(path).stem
        cfg.cs.append(CsSpec(name, str(Path(path).resolve()), getattr(args, "assume_unit_weights", False)))
    if getattr(args, "out", None):
        cfg.output_dir = str(Path(args.out).resolve())
    elif cfg_path:
        cfg.output_dir = str(cfg.resolve(cfg.output_dir))
    return cfg


def _inputs(cfg: RunConfig) -> list[dict]:
    return [{"path": p, "sha256": sha256_file(cfg.resolve(p))} for p in cfg.input_paths()]


def run(command: str, cfg: RunConfig, args: argparse.Namespace | None = None) -> OutputWriter:
    """Execute one subcommand; writes a manifest even when a stage fails."""
    standalone = args is not None and (
        (command == "tt" and args.pt_edges) or (command == "overlap" and args.tt)
    )
    if not cfg.snapshots and not standalone:
        raise ConfigError("no snapshots configured; pass --config or --log/--trackers")
    cfg.validate()
    out = OutputWriter(cfg.output_dir)
    pipe = Pipeline(cfg, out)
    payload = {
        "tool": "trackgraph",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.digest(),
        "config": cfg.public_dict(),
        "inputs": _inputs(cfg),
    }
    try:
        _dispatch(command, pipe, args)
    except TrackgraphError as exc:
        out.manifest({**payload, "status": "incomplete", "error": str(exc)})
        raise
    if command in ("ingest", "netstats", "pt", "tt", "all") and cfg.snapshots:
        payload["tracker_list_versions"] = {s.id: pipe.trackers(s).version for s in cfg.snapshots}
    out.manifest({**payload, "status": "complete", "error": None})
    return out


def _dispatch(command: str, pipe: Pipeline, args: argparse.Namespace | None) -> None:
    cfg = pipe.cfg
    specs = cfg.snapshots
    if command == "ingest":
        for s in specs:
            pipe.write_ingest(s)
    elif command == "netstats":
        for s in specs:
            pipe.write_netstats(s)
    elif command == "pt":
        for s in specs:
            pipe.write_pt(s)
    elif command == "tt":
        if args is not None and args.pt_edges:
            pt = PtGraph(read_graph(args.pt_edges, args.pt_nodes))
            tt = build_tt(pt.lcc(), cfg.theta)
            write_graph(pipe.out, "tt/", tt.graph)
            pipe.out.json("tt/summary.json", round_floats({**tt_summary(tt).to_dict(), "theta": tt.theta}))
        else:
            for s in specs:
                pipe.write_tt(s)
    elif command == "overlap":
        if not cfg.cs:
            raise ConfigError("overlap needs at least one --cs file")
        if args is not None and args.tt:
            tt = TtGraph(read_graph(args.tt, args.tt_nodes), cfg.theta)
            for c in cfg.cs:
                write_overlap(pipe.out, f"overlap/{c.name}", pipe.cs_graph(c), tt, cfg.top_q)
        else:
            for s in specs:
                for c in cfg.cs:
                    pipe.write_overlap(s, c)
    elif command == "evolve":
        pipe.write_evolve()
    elif command == "all":
        for s in specs:
            pipe.write_ingest(s)
        for s in pipe.chronological:
            pipe.write_netstats(s)
        for s in pipe.chronological:
            pipe.write_pt(s)
        for s in pipe.chronological:
            pipe.write_tt(s)
        for s in pipe.chronological:
            for c in cfg.cs:
                pipe.write_overlap(s, c)
        if len(specs) >= 2:
            pipe.write_evolve()
    else:
        raise ConfigError(f"unknown command {command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        if args.command == "demo":
            for path in demo.write_demo(args.dest):
                print(path)
            return 0
        cfg = config_from_args(args)
        out = run(args.command, cfg, args)
    except TrackgraphError as exc:
        print(f"trackgraph: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"wrote {len(out.written)} files to {out.root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

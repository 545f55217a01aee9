"""Output files: formatting rules, graph exchange CSVs and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import IngestError
from .graphcore import Graph, Role


def frac(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def pct(x: float | None) -> str:
    return "" if x is None else f"{x:.2f}"


def num(x: float) -> str:
    """Counts as integers, anything else as a 6-decimal fraction."""
    if isinstance(x, int) or (isinstance(x, float) and x.is_integer()):
        return str(int(x))
    return f"{x:.6f}"


def round_floats(obj: Any, places: int = 6) -> Any:
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return round(obj, places)
    if isinstance(obj, dict):
        return {k: round_floats(v, places) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, places) for v in obj]
    return obj


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class OutputWriter:
    """Writes files below ``root`` and remembers every path written."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.written: list[str] = []

    def _path(self, rel: str) -> Path:
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def text(self, rel: str, content: str) -> Path:
        p = self._path(rel)
        p.write_text(content, encoding="utf-8", newline="")
        if rel not in self.written:
            self.written.append(rel)
        return p

    def csv(self, rel: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return self.text(rel, buf.getvalue())

    def json(self, rel: str, obj: Any) -> Path:
        return self.text(rel, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def manifest(self, payload: dict) -> Path:
        outputs = [{"path": rel, "sha256": sha256_file(self.root / rel)} for rel in sorted(self.written)]
        return self.json("manifest.json", {**payload, "outputs": outputs})


# -- graph exchange ---------------------------------------------------------


def edge_rows(g: Graph, publisher_first: bool = False) -> list[list[str]]:
    rows = []
    for a, b, w in g.edges():
        if publisher_first and g.role(b) is Role.PUBLISHER:
            a, b = b, a
        rows.append([a, b, num(w)])
    return rows


def write_graph(out: OutputWriter, prefix: str, g: Graph, publisher_first: bool = False) -> None:
    out.csv(f"{prefix}edges.csv", ["node_a", "node_b", "weight"], edge_rows(g, publisher_first))
    out.csv(f"{prefix}nodes.csv", ["node", "role"], [[v, r.value] for v, r in g.roles().items()])


def read_graph(edges_path: str | Path, nodes_path: str | Path | None = None) -> Graph:
    """Load the ``node_a,node_b,weight`` edge list and an optional ``node,role`` file."""
    roles: dict[str, Role] = {}
    try:
        if nodes_path is not None:
            with open(nodes_path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    roles[row["node"]] = Role(row.get("role") or "untyped")
        edges = []
        with open(edges_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                edges.append((row["node_a"], row["node_b"], float(row.get("weight") or 1)))
    except (OSError, KeyError, ValueError) as exc:
        raise IngestError(f"cannot read graph {edges_path}: {exc}") from exc
    for a, b, _ in edges:
        roles.setdefault(a, Role.UNTYPED)
        roles.setdefault(b, Role.UNTYPED)
    return Graph(roles, edges)

"""Run configuration: one JSON file plus command-line overrides."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class SnapshotSpec:
    id: str
    log: str
    tracker_list: str
    date_label: str = ""
    tracker_list_version: str = ""

    def __post_init__(self) -> None:
        self.date_label = self.date_label or self.id
        self.tracker_list_version = self.tracker_list_version or Path(self.tracker_list).stem


@dataclass
class CsSpec:
    name: str
    path: str
    assume_unit_weights: bool = False


@dataclass
class RunConfig:
    snapshots: list[SnapshotSpec] = field(default_factory=list)
    cs: list[CsSpec] = field(default_factory=list)
    suffix_list: str | None = None
    org_map: str | None = None
    output_dir: str = "out"
    theta: int = 2
    top_k: int = 25
    top_q: float = 5.0
    align_publishers: bool = True
    redundancy: bool = True
    seed: int = 0
    base_dir: str = field(default=".", repr=False)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def input_paths(self) -> list[str]:
        paths = []
        for s in self.snapshots:
            paths += [s.log, s.tracker_list]
        paths += [c.path for c in self.cs]
        paths += [p for p in (self.suffix_list, self.org_map) if p]
        return paths

    def validate(self) -> None:
        if self.theta < 1:
            raise ConfigError("theta must be >= 1")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if not 0 < self.top_q < 100:
            raise ConfigError("top_q must be in (0, 100)")
        ids = [s.id for s in self.snapshots]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate snapshot ids in {ids}")
        names = [c.name for c in self.cs]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate CS dataset names in {names}")
        for p in self.input_paths():
            if not self.resolve(p).is_file():
                raise ConfigError(f"input file not found: {p}")

    def public_dict(self) -> dict:
        """Everything that determines the outputs (not where they are written)."""
        d = asdict(self)
        d.pop("output_dir")
        d.pop("base_dir")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.public_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_KNOWN = {f for f in RunConfig.__dataclass_fields__ if f != "base_dir"}


def config_from_dict(data: dict, base_dir: str | Path = ".") -> RunConfig:
    unknown = set(data) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data = dict(data)
    try:
        snaps = [SnapshotSpec(**s) for s in data.pop("snapshots", [])]
        cs = [CsSpec(**c) for c in data.pop("cs", [])]
        cfg = RunConfig(snapshots=snaps, cs=cs, base_dir=str(base_dir), **data)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(data, base_dir=path.parent)

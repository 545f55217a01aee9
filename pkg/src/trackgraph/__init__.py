"""Publisher-tracker and tracker-tracker graph analysis of web crawl logs."""

from .errors import ConfigError, GraphError, IngestError, TrackgraphError
from .graphcore import Graph, GraphSummary, NodeMetrics, Role
from .ingest import CrawlRecord, RequestClass, Snapshot, TrackerList
from .suffix import SuffixRules, etld1

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CrawlRecord",
    "Graph",
    "GraphError",
    "GraphSummary",
    "IngestError",
    "NodeMetrics",
    "RequestClass",
    "Role",
    "Snapshot",
    "SuffixRules",
    "TrackerList",
    "TrackgraphError",
    "etld1",
    "__version__",
]

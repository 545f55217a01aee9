"""Exception hierarchy. Each family maps to one CLI exit code."""


class TrackgraphError(Exception):
    exit_code = 1


class IngestError(TrackgraphError):
    """Unreadable or malformed input files."""

    exit_code = 2


class GraphError(TrackgraphError):
    """A graph or metric is undefined for the given input."""

    exit_code = 3


class ConfigError(TrackgraphError):
    exit_code = 4

"""Public-suffix rules and eTLD+1 reduction.

Rules follow the publicsuffix.org text format: one rule per line, ``//``
comments, ``*.`` wildcards and ``!`` exceptions. The implicit root rule ``*``
is always present, so unknown TLDs still yield a registrable domain.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import IngestError

PRIVATE_MARKER = "===BEGIN PRIVATE DOMAINS==="


@dataclass(frozen=True)
class SuffixRules:
    rules: frozenset[str]
    _cache: dict[str, str] = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if "*" not in self.rules:
            object.__setattr__(self, "rules", self.rules | {"*"})

    @classmethod
    def from_lines(cls, lines: Iterable[str], icann_only: bool = True) -> SuffixRules:
        rules = set()
        for raw in lines:
            line = raw.strip()
            if icann_only and PRIVATE_MARKER in line:
                break
            if not line or line.startswith("//"):
                continue
            rule = line.split()[0].lower()
            try:
                rules.add(_rule_ascii(rule))
            except ValueError as exc:
                raise IngestError(f"bad suffix rule {rule!r}") from exc
        return cls(frozenset(rules))

    @classmethod
    def load(cls, path: str | Path, icann_only: bool = True) -> SuffixRules:
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_lines(fh, icann_only=icann_only)
        except OSError as exc:
            raise IngestError(f"cannot read suffix list {path}: {exc}") from exc

    @classmethod
    def default(cls) -> SuffixRules:
        text = resources.files("trackgraph").joinpath("data/public_suffix_list.dat").read_text("utf-8")
        return cls.from_lines(text.splitlines())

    def public_suffix(self, host: str) -> str:
        labels = host.split(".")
        # Longest matching rule wins; any matching exception beats it.
        best = 1
        for i in range(len(labels)):
            tail = labels[i:]
            name = ".".join(tail)
            if "!" + name in self.rules:
                return ".".join(tail[1:])
            wild = ".".join(["*"] + tail[1:])
            if name in self.rules or wild in self.rules:
                best = max(best, len(tail))
        return ".".join(labels[-best:])

    def etld1(self, host: str) -> str:
        cached = self._cache.get(host)
        if cached is not None:
            return cached
        result = _etld1(host, self)
        self._cache[host] = result
        return result


def _rule_ascii(rule: str) -> str:
    prefix = ""
    if rule.startswith("!"):
        prefix, rule = "!", rule[1:]
    elif rule.startswith("*."):
        prefix, rule = "*.", rule[2:]
    return prefix + _to_ascii(rule)


def _to_ascii(host: str) -> str:
    if host.isascii():
        return host
    try:
        return host.encode("idna").decode("ascii")
    except UnicodeError as exc:
        raise ValueError(f"invalid IDN host {host!r}") from exc


def normalize_host(host: str) -> str:
    """Lowercase, strip a trailing dot and convert IDN labels to punycode."""
    host = host.strip().lower().rstrip(".")
    if host.startswith("[") and host.endswith("]"):
        host = host[1:-1]
    return _to_ascii(host)


def _is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
    except ValueError:
        return False
    return True


def _etld1(host: str, rules: SuffixRules) -> str:
    host = normalize_host(host)
    if not host or any(not label for label in host.split(".")):
        raise ValueError(f"unregistrable host {host!r}")
    if _is_ip(host):
        return host
    suffix = rules.public_suffix(host)
    if suffix == host:
        raise ValueError(f"unregistrable host {host!r}")
    labels = host.split(".")
    n = len(suffix.split(".")) + 1
    return ".".join(labels[-n:])


def etld1(host: str, rules: SuffixRules) -> str:
    """Registrable domain (public suffix plus one label) of ``host``.

    Raises ``ValueError("unregistrable host ...")`` for bare public suffixes.
    """
    return rules.etld1(host)

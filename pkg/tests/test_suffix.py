from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackgraph.errors import IngestError
from trackgraph.suffix import SuffixRules, etld1, normalize_host


@pytest.mark.parametrize(
    "host, expected",
    [
        ("subdomain1.domain.com", "domain.com"),
        ("domain.com", "domain.com"),
        ("a.b.co.uk", "b.co.uk"),
        ("WWW.Example.COM.", "example.com"),
        ("foo.bar.ck", "foo.bar.ck"),  # *.ck wildcard
        ("www.ck", "www.ck"),  # !www.ck exception
        ("a.city.kawasaki.jp", "city.kawasaki.jp"),
        ("x.cloudfront.net", "cloudfront.net"),  # private section ignored
        ("bücher.de", "xn--bcher-kva.de"),
        ("192.168.0.1", "192.168.0.1"),
        ("localhost.unknowntld", "localhost.unknowntld"),  # implicit * rule
    ],
)
def test_etld1_examples(rules, host, expected):
    assert etld1(host, rules) == expected


@pytest.mark.parametrize("host", ["com", "co.uk", "", "foo.ck"])
def test_bare_suffix_is_unregistrable(rules, host):
    with pytest.raises(ValueError):
        rules.etld1(host)


def test_private_section_optional():
    lines = ["com", "// ===BEGIN PRIVATE DOMAINS===", "cloudfront.net"]
    assert SuffixRules.from_lines(lines).etld1("a.b.cloudfront.net") == "cloudfront.net"
    full = SuffixRules.from_lines(lines, icann_only=False)
    assert full.etld1("a.b.cloudfront.net") == "b.cloudfront.net"


def test_load_missing_file(tmp_path):
    with pytest.raises(IngestError):
        SuffixRules.load(tmp_path / "nope.dat")


def test_normalize_host():
    assert normalize_host(" Foo.EXAMPLE.com. ") == "foo.example.com"


label = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1, max_size=8)
tld = st.sampled_from(["com", "net", "org", "co.uk", "de", "fr", "com.au", "ck", "bd"])


@settings(max_examples=300, deadline=None)
@given(st.lists(label, min_size=1, max_size=4), tld)
def test_etld1_properties(rules, labels, suffix):
    host = ".".join(labels + [suffix])
    try:
        e = rules.etld1(host)
    except ValueError:
        return  # e.g. one label under a wildcard suffix
    assert host == e or host.endswith("." + e)
    assert rules.etld1(e) == e
    # prepending labels never changes the registrable domain
    assert rules.etld1("extra." + host) == e

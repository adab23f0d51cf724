import ipaddress
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcov.config import (
    ElementId, extract_elements, format_config, load_network, parse_config, parse_file,
    resolve_peer_group,
)
from netcov.config.network import Link, Network
from netcov.errors import (
    ConfigError, ConfigSyntaxError, DuplicateDefinition, UnknownNeighbor, UnresolvedReference,
)
from oracles import FIXTURES, count_lines

R1 = os.path.join(FIXTURES, "two_router", "R1.cfg")


def test_two_router_r1_model():
    cfg = parse_file(R1)
    assert cfg.hostname == "R1"
    assert cfg.device_line == 14
    assert [i.name for i in cfg.interfaces] == ["eth0"]
    n = cfg.bgp.neighbor(ipaddress.IPv4Address("192.168.1.2"))
    assert (n.remote_as, n.import_policy, n.export_policy) == (2, "R2-to-R1", "R1-to-R2")
    assert [c.seq for c in cfg.policy("R2-to-R1").clauses] == [10, 20]


def test_two_router_element_spans():
    spans = {str(e.id): e.line_span for e in extract_elements(parse_file(R1))}
    assert spans == {
        "R1|Interface|eth0": (1, 2),
        "R1|BgpPeer|192.168.1.2": (3, 4),
        "R1|RoutePolicyClause|R1-to-R2:10": (5, 5),
        "R1|RoutePolicyClause|R2-to-R1:10": (7, 8),
        "R1|RoutePolicyClause|R2-to-R1:20": (9, 11),
        "R1|PrefixList|BLOCKED": (12, 12),
        "R1|PrefixList|PREFERRED": (13, 13),
    }


def test_every_element_referenced_in_fig1():
    assert all(e.referenced for e in extract_elements(parse_file(R1)))


def test_unbound_policy_and_its_list_are_dead():
    cfg = parse_file(os.path.join(FIXTURES, "policy_attrs", "R1.cfg"))
    dead = sorted(str(e.id) for e in extract_elements(cfg) if not e.referenced)
    assert dead == ["R1|PrefixList|OLD", "R1|RoutePolicyClause|LEGACY:10"]


def test_comments_do_not_count_as_lines():
    cfg = parse_config("# header\ndevice X;\n\ninterface e { address 10.0.0.1/24; } # tail\n")
    assert cfg.token_lines == frozenset({2, 4})


@pytest.mark.parametrize("text,line,cls", [
    ("device X;\ninterface e {\n  adress 10.0.0.1/24; }\n", 3, ConfigSyntaxError),
    ("device X;\ninterface e { address 10.0.0.1/24; }\ninterface e { }\n", 3,
     DuplicateDefinition),
    ("device X;\nbgp { local-as 1;\n neighbor 10.0.0.2 { remote-as 2;\n"
     " import-policy NOPE; } }\n", 4, UnresolvedReference),
    ("device X;\nprefix-list P { 10.0.0.0/8 ge 4; }\n", 2, ConfigSyntaxError),
    ("device X;\nstatic-route 10.0.0.0/33 next-hop 1.1.1.1;\n", 2, ConfigSyntaxError),
    ("device X;\ninterface e {\n", 2, ConfigSyntaxError),
])
def test_errors_carry_file_and_line(text, line, cls):
    with pytest.raises(cls) as info:
        parse_config(text, "bad.cfg")
    assert info.value.line == line
    assert info.value.filename == "bad.cfg"
    assert str(info.value).startswith(f"bad.cfg:{line}:")


def test_peer_group_inheritance():
    cfg = parse_file(os.path.join(FIXTURES, "peer_group", "HUB.cfg"))
    es = resolve_peer_group(cfg, ipaddress.IPv4Address("172.16.9.6"))
    assert es.remote_as == 65091
    assert es.import_policy == "SPOKE-IN"
    assert es.contributors == (ElementId("HUB", "BgpPeer", "172.16.9.6"),
                               ElementId("HUB", "BgpPeerGroup", "SPOKES"))
    with pytest.raises(UnknownNeighbor):
        resolve_peer_group(cfg, ipaddress.IPv4Address("9.9.9.9"))


def test_topology_must_name_real_interfaces():
    cfg = parse_file(R1)
    with pytest.raises(ConfigError):
        Network({"R1": cfg}, [Link("R1", "eth0", "R9", "eth0")])


def test_load_network_reads_all_configs():
    net = load_network(os.path.join(FIXTURES, "fattree_k4", "configs"))
    assert len(net.hosts) == 20
    assert sum(1 for h in net.hosts if h.startswith("spine")) == 4


def test_considered_lines_match_independent_scan():
    path = os.path.join(FIXTURES, "fattree_k4", "configs", "leaf1.cfg")
    cfg = parse_file(path)
    assert len(cfg.token_lines - {cfg.device_line}) == count_lines(path)


def test_printer_round_trip_on_fixtures():
    for root, _, files in os.walk(FIXTURES):
        for f in files:
            if f.endswith(".cfg"):
                cfg = parse_file(os.path.join(root, f))
                again = parse_config(format_config(cfg), cfg.source_file)
                assert format_config(again) == format_config(cfg), f


_names = st.from_regex(r"[A-Z][A-Z0-9-]{0,6}", fullmatch=True)
_prefixes = st.builds(lambda a, n: ipaddress.IPv4Network((a, n), strict=False),
                      st.integers(0, 2**32 - 1), st.integers(0, 32))


@settings(max_examples=60, deadline=None)
@given(st.lists(_prefixes, min_size=1, max_size=5, unique=True), _names, st.integers(1, 4294967295))
def test_generated_config_round_trips(prefixes, name, asn):
    lines = ["device GEN;", f"prefix-list {name} {{"]
    lines += [f"  {p};" for p in prefixes] + ["}"]
    lines += ["bgp {", f"  local-as {asn};"] + [f"  network {p};" for p in prefixes] + ["}"]
    text = "\n".join(lines) + "\n"
    cfg = parse_config(text)
    again = parse_config(format_config(cfg))
    assert format_config(again) == format_config(cfg)
    assert [n.prefix for n in again.bgp.networks] == prefixes

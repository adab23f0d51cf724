import ipaddress

import pytest

from netcov.config import ElementId
from netcov.errors import SuiteError
from netcov.harness import (
    ExportCheck, PolicyCheck, PolicySelector, PreferenceCheck, Reachability, RoutePresent,
    dataplane_coverage, expand, load_suite, parse_test, run_suite, run_test,
)
from netcov.harness.archetypes import ARCHETYPES, MARTIANS
from netcov.ifg.facts import MAIN, MSG, PATH, PROTO
from netcov.routes import RouteAttrs
from oracles import load_fixture

IP = ipaddress.IPv4Address
NET = ipaddress.IPv4Network


def run(name, spec):
    L = load_fixture(name)
    return run_test(spec, L.state, L.network)


def test_route_present_pass_and_fail():
    ok = run("two_router", RoutePresent("t", "R1", NET("10.10.1.0/24"), "bgp"))
    assert ok.status == "pass" and [f.kind for f in ok.tested_facts] == [MAIN]
    wrong_proto = run("two_router", RoutePresent("t", "R1", NET("10.10.1.0/24"), "static"))
    assert wrong_proto.status == "fail" and wrong_proto.tested_facts == []
    missing = run("two_router", RoutePresent("t", "R*", NET("10.10.1.0/24"), "bgp"))
    assert missing.status == "fail" and "R2" in missing.message


def test_unmatched_host_glob_is_an_error():
    out = run("two_router", RoutePresent("t", "Z*", NET("10.10.1.0/24")))
    assert out.status == "error" and "matches no device" in out.message


def test_reachability_seeds_paths():
    out = run("static_ecmp", Reachability("t", "R1", (IP("10.80.0.1"),)))
    assert out.status == "pass"
    assert [f.kind for f in out.tested_facts] == [PATH, PATH]


def test_failed_reachability_seeds_the_hops_it_used():
    out = run("acl", Reachability("t", "H", (IP("10.40.0.10"),), proto="tcp", dst_port=23))
    assert out.status == "fail"
    assert [f.key[0] for f in out.tested_facts] == ["H"]
    assert all(f.kind == MAIN for f in out.tested_facts)


def test_reachability_exclude_self():
    out = run("chain3", Reachability("t", "*", (IP("10.1.0.1"),), exclude_self=True))
    assert out.status == "pass"
    assert {f.payload.src_host for f in out.tested_facts} == {"B", "C"}


def test_policy_check_records_direct_elements():
    sel = PolicySelector(devices="R1", direction="import")
    out = run("two_router", PolicyCheck("t", sel, (RouteAttrs(NET("10.10.2.0/24")),), "Reject"))
    assert out.status == "pass" and out.tested_facts == []
    assert out.direct_elements == {ElementId("R1", "RoutePolicyClause", "R2-to-R1:10"),
                                   ElementId("R1", "PrefixList", "BLOCKED")}
    flipped = run("two_router", PolicyCheck("t", sel, (RouteAttrs(NET("10.10.2.0/24")),), "Accept"))
    assert flipped.status == "fail" and "R2-to-R1" in flipped.message


def test_policy_selector_directions():
    sel = PolicySelector(devices="R2", direction="export", neighbor="192.168.1.1")
    out = run("two_router", PolicyCheck("t", sel, (RouteAttrs(NET("10.10.1.0/24")),), "Accept"))
    assert out.direct_elements == {ElementId("R2", "RoutePolicyClause", "R2-to-R1:10")}
    none = PolicySelector(devices="R2", name="NOPE*")
    assert run("two_router", PolicyCheck("t", none, (), "Accept")).status == "error"


def test_export_check_announced_and_suppressed():
    ok = run("aggregation", ExportCheck("t", "S", "172.16.2.10", NET("10.0.0.0/16")))
    assert ok.status == "pass" and [f.kind for f in ok.tested_facts] == [MSG]
    assert ok.tested_facts[0].key[2] == "pre_import"
    hidden = run("aggregation", ExportCheck("t", "S", "172.16.2.10", NET("10.0.1.0/24"),
                                            "not-announced"))
    assert hidden.status == "pass" and {f.kind for f in hidden.tested_facts} == {PROTO}
    wrong = run("aggregation", ExportCheck("t", "S", "172.16.2.10", NET("10.0.1.0/24")))
    assert wrong.status == "fail"


def test_export_check_to_external_peer():
    out = run("external", ExportCheck("t", "BR", "external", NET("10.100.0.0/24")))
    assert out.status == "pass"
    blocked = run("external", ExportCheck("t", "BR", "external", NET("8.8.8.0/24"),
                                          "not-announced"))
    assert blocked.status == "pass"


def test_preference_check():
    good = run("ecmp_diamond", PreferenceCheck("t", (IP("172.16.1.5"), IP("172.16.1.14")), "M2"))
    assert good.status == "pass" and len(good.tested_facts) == 1
    bad = run("ecmp_diamond", PreferenceCheck("t", (IP("172.16.1.14"), IP("172.16.1.5")), "M2"))
    assert bad.status == "fail" and "expected 172.16.1.14" in bad.message
    n_a = run("two_router", PreferenceCheck("t", (IP("192.168.1.2"),)))
    assert n_a.status == "pass" and "not applicable" in n_a.message


def test_parse_test_validation():
    with pytest.raises(SuiteError):
        parse_test({"kind": "Bogus", "name": "x"})
    with pytest.raises(SuiteError):
        parse_test({"kind": "RoutePresent", "name": "x"})
    with pytest.raises(SuiteError):
        parse_test({"kind": "PolicyCheck", "name": "x", "expect": "Maybe", "routes": []})
    t = parse_test({"kind": "Reachability", "name": "x", "src_host": "a",
                    "dst_prefix": "10.0.0.0/24"})
    assert t.dst_ips == (IP("10.0.0.1"),)


def test_duplicate_names_rejected():
    with pytest.raises(SuiteError, match="duplicate"):
        load_suite({"tests": [
            {"kind": "RoutePresent", "name": "a", "host": "*", "prefix": "0.0.0.0/0"},
            {"kind": "RoutePresent", "name": "a", "host": "*", "prefix": "1.0.0.0/8"}]})


def test_every_archetype_expands():
    L = load_fixture("external")
    args = {
        "BlockToExternal": {}, "NoMartian": {}, "SanityIn": {"policy": "SANITY-IN",
                                                           "routes": [{"prefix": "10.0.0.0/8"}]},
        "PeerSpecificRoute": {}, "InterfaceReachability": {}, "DefaultRouteCheck": {},
        "ToRPingmesh": {"leaves": "*", "interface": "eth1"},
        "ExportAggregate": {"host": "BR", "prefix": "10.100.0.0/24"},
        "RoutePreference": {"ranking": ["198.51.100.2"]},
    }
    assert set(args) == set(ARCHETYPES)
    for name, extra in args.items():
        specs = expand({"archetype": name, **extra}, L.network, L.state)
        assert specs, name
    with pytest.raises(SuiteError):
        expand({"archetype": "Nope"})


def test_no_martian_covers_the_martian_clause():
    L = load_fixture("external")
    (spec,) = expand({"archetype": "NoMartian", "devices": "BR", "neighbor": "external"},
                     L.network, L.state)
    assert [str(r.prefix) for r in spec.routes] == list(MARTIANS)
    out = run_test(spec, L.state, L.network)
    assert out.status == "pass"
    assert ElementId("BR", "PrefixList", "MARTIANS") in out.direct_elements


def test_block_to_external_tags_community():
    L = load_fixture("external")
    (spec,) = expand({"archetype": "BlockToExternal"}, L.network, L.state)
    assert all("65535:666" in r.communities for r in spec.routes)
    out = run_test(spec, L.state, L.network)
    assert out.status == "pass"
    assert ElementId("BR", "RoutePolicyClause", "TO-TRANSIT:10") in out.direct_elements


def test_suite_seeds_are_union_including_failures():
    L = load_fixture("two_router")
    suite = [RoutePresent("a", "R1", NET("10.10.1.0/24")),
             RoutePresent("b", "R*", NET("10.10.1.0/24"), "bgp")]
    outcomes, seeds, _ = run_suite(suite, L.state, L.network)
    assert [o.status for o in outcomes] == ["pass", "fail"]
    assert len(seeds) == 1  # same entry examined twice


def test_parallel_suite_matches_serial():
    L = load_fixture("fattree_k4")
    a = run_suite(L.suite, L.state, L.network, workers=1)
    b = run_suite(L.suite, L.state, L.network, workers=4)
    assert [f.id for f in a[1]] == [f.id for f in b[1]]
    assert [o.status for o in a[0]] == [o.status for o in b[0]]


def test_dataplane_coverage_counts_path_hops():
    L = load_fixture("chain3")
    _, seeds, _ = run_suite(L.suite, L.state, L.network)
    total = sum(len(v) for v in L.state.main.values())
    # C's bgp entry plus B's on the path; A delivers locally without a lookup
    assert total == 8
    assert dataplane_coverage(seeds, L.state) == pytest.approx(2 / 8)
    assert dataplane_coverage([], L.state) == 0.0

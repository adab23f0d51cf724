import ipaddress
import json

import pytest

from netcov.config import ElementId
from netcov.errors import CycleDetected, InferenceError, ShapeViolation, SimulationMismatch
from netcov.harness import run_suite
from netcov.ifg import DEFAULT_RULES, IFG, InferenceRule, build_ifg
from netcov.ifg.facts import (
    ALLOWED_PARENTS, CONFIG, DISJ, EDGE, MAIN, MSG, PATH, PROTO, Fact, main_fact,
)
from netcov.state import StableState
from oracles import CONVERGING, load_fixture, taint_covered

NET = ipaddress.IPv4Network

TWO_ROUTER_COVERED = {
    ElementId("R1", "BgpPeer", "192.168.1.2"),
    ElementId("R1", "Interface", "eth0"),
    ElementId("R1", "PrefixList", "PREFERRED"),
    ElementId("R1", "RoutePolicyClause", "R2-to-R1:20"),
    ElementId("R2", "BgpPeer", "192.168.1.1"),
    ElementId("R2", "Interface", "eth0"),
    ElementId("R2", "Interface", "eth1"),
    ElementId("R2", "NetworkStatement", "10.10.1.0/24"),
    ElementId("R2", "RoutePolicyClause", "R2-to-R1:10"),
}


def seed_main(state, host, prefix):
    return [main_fact(m) for m in state.main_entries(host, NET(prefix))]


def test_two_router_covered_elements():
    L = load_fixture("two_router")
    g = build_ifg(seed_main(L.state, "R1", "10.10.1.0/24"), L.state, L.network)
    assert g.covered_elements() == TWO_ROUTER_COVERED


def test_two_router_graph_shape():
    L = load_fixture("two_router")
    g = build_ifg(seed_main(L.state, "R1", "10.10.1.0/24"), L.state, L.network)
    kinds = sorted({n[0] for n in g.nodes})
    assert kinds == [CONFIG, EDGE, MAIN, MSG, PATH, PROTO]
    msgs = sorted(n[1][2] for n in g.nodes if n[0] == MSG)
    assert msgs == ["post_import", "pre_import"]
    for p, c in g.edges:
        assert p[0] in ALLOWED_PARENTS[c[0]]


@pytest.mark.parametrize("name", CONVERGING)
def test_lazy_ifg_matches_forward_taint(name):
    L = load_fixture(name, taint=True)
    _, seeds, direct = run_suite(L.suite, L.state, L.network)
    g = build_ifg(seeds, L.state, L.network)
    assert g.covered_elements() | set(direct) == taint_covered(seeds, direct, L.state, L.network)


def test_aggregate_uses_disjunctive_node():
    L = load_fixture("aggregation")
    g = build_ifg(seed_main(L.state, "X", "10.0.0.0/16"), L.state, L.network)
    disj = [n for n in g.nodes if n[0] == DISJ and n[1][2] == "aggregate"]
    assert len(disj) == 1
    assert len(g.parents(disj[0])) == 2


def test_single_contributor_aggregate_still_has_disjunctive_node():
    L = load_fixture("aggregation")
    g = build_ifg(seed_main(L.state, "S", "10.0.0.0/16"), L.state, L.network)
    (d,) = [n for n in g.nodes if n[0] == DISJ]
    assert len(g.parents(d)) == 2


def test_ecmp_resolution_fans_in():
    L = load_fixture("static_ecmp")
    g = build_ifg(seed_main(L.state, "R1", "10.81.0.0/24"), L.state, L.network)
    (d,) = [n for n in g.nodes if n[0] == DISJ]
    assert d[1][2] == "resolve"
    assert sorted(p[1][3] for p in g.parents(d)) == ["172.16.8.2", "172.16.8.6"]


def test_workers_do_not_change_the_graph():
    L = load_fixture("fattree_k4")
    _, seeds, _ = run_suite(L.suite, L.state, L.network)
    a = build_ifg(seeds, L.state, L.network, workers=1)
    b = build_ifg(seeds, L.state, L.network, workers=4)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())


def test_restrict_keeps_only_ancestors():
    L = load_fixture("chain3")
    _, seeds, _ = run_suite(L.suite, L.state, L.network)
    g = build_ifg(seeds, L.state, L.network)
    one = seeds[0]
    sub = g.restrict({one.id})
    assert sub.seeds == {one.id}
    assert set(sub.nodes) <= set(g.nodes)
    assert all(c in sub.nodes and p in sub.nodes for p, c in sub.edges)


def test_every_node_reaches_a_seed():
    L = load_fixture("external")
    _, seeds, _ = run_suite(L.suite, L.state, L.network)
    g = build_ifg(seeds, L.state, L.network)
    assert set(g.restrict(g.seeds).nodes) == set(g.nodes)


def _tampered(state, host, prefix, **changes):
    raw = state.to_json()
    for b in raw["bgp"]:
        if b["host"] == host and b["attrs"]["prefix"] == prefix:
            b["attrs"].update(changes)
    return StableState.from_json(raw)


def test_inconsistent_snapshot_is_reported():
    L = load_fixture("two_router")
    bad = _tampered(L.state, "R1", "10.10.1.0/24", local_pref=999)
    with pytest.raises(SimulationMismatch) as info:
        build_ifg(seed_main(bad, "R1", "10.10.1.0/24"), bad, L.network)
    assert info.value.rule == "post_import_message"
    assert info.value.fact is not None


def test_missing_state_is_an_inference_error():
    L = load_fixture("two_router")
    raw = L.state.to_json()
    raw["bgp"] = [b for b in raw["bgp"] if b["host"] != "R1"]
    bad = StableState.from_json(raw)
    with pytest.raises(InferenceError) as info:
        build_ifg(seed_main(bad, "R1", "10.10.1.0/24"), bad, L.network)
    assert info.value.rule == "main_from_protocol"


def test_shape_violation_is_caught():
    L = load_fixture("two_router")
    bogus = InferenceRule("bogus", lambda f: f.kind == MAIN,
                          lambda f, ctx: [(Fact(DISJ, ("d",)), Fact(PATH, ("p",)))])
    with pytest.raises(ShapeViolation):
        build_ifg(seed_main(L.state, "R1", "10.10.1.0/24"), L.state, L.network,
                  rules=DEFAULT_RULES + (bogus,))


def test_cycles_are_caught():
    a, b = Fact(MAIN, ("a",)), Fact(MAIN, ("b",))
    g = IFG(seeds=[a.id])
    g.add(b, a)
    g.add(a, b)
    with pytest.raises(CycleDetected):
        g.topological_order()


def test_ifg_json_lists_seeds():
    L = load_fixture("two_router")
    g = build_ifg(seed_main(L.state, "R1", "10.10.1.0/24"), L.state, L.network)
    doc = g.to_json()
    assert sum(n["seed"] for n in doc["nodes"]) == 1
    assert len(doc["edges"]) == len(g.edges)

"""Test execution: verdicts, tested data-plane facts, directly covered elements."""
from __future__ import annotations

import ipaddress
from concurrent.futures import ThreadPoolExecutor
from fnmatch import fnmatchcase

from ..config.elements import resolve_peer_group
from ..errors import NetcovError, SuiteError
from ..ifg.facts import MAIN, PATH, PRE_IMPORT, main_fact, message_fact, path_fact, proto_fact
from ..policy import evaluate_policy
from ..sim.propagation import message_origins
from ..sim.trace import trace_path
from .spec import (
    ExportCheck, PolicyCheck, PreferenceCheck, Reachability, RoutePresent, TestOutcome,
)


def _hosts(pattern, hosts):
    found = [h for h in hosts if fnmatchcase(h, pattern)]
    if not found:
        raise SuiteError(f"host selector {pattern!r} matches no device")
    return found


# ---------------------------------------------------------------- data plane

def run_route_present(spec, state):
    facts, missing = [], []
    for host in _hosts(spec.host, state.hosts):
        entries = [m for m in state.main_entries(host, spec.prefix)
                   if spec.protocol is None or m.protocol == spec.protocol]
        if not entries:
            missing.append(host)
        facts += [main_fact(m) for m in entries]
    if missing:
        return TestOutcome(spec.name, "fail", facts,
                           message=f"{spec.prefix} missing on {', '.join(missing)}")
    return TestOutcome(spec.name, "pass", facts)


def _source_ip(state, host):
    for name in sorted(state.interfaces.get(host, {})):
        i = state.interfaces[host][name]
        if i.address is not None and i.up:
            return i.address.ip
    return None


def run_reachability(spec, state):
    """Trace every (source, destination) pair; each complete path is a tested fact."""
    facts, failures = [], []
    for host in _hosts(spec.src_host, state.hosts):
        src_ip = spec.src_ip or _source_ip(state, host)
        if src_ip is None:
            failures.append(f"{host} has no source address")
            continue
        for dst in spec.dst_ips:
            if spec.exclude_self and state.owns(host, dst):
                continue
            res = trace_path(state, host, src_ip, dst, spec.proto, spec.dst_port)
            if res.paths:
                facts += [path_fact(p) for p in res.paths]
                continue
            failures.append(f"{host} -> {dst}")
            for d in res.drops:
                facts += [main_fact(state.main_entry(h.entry)) for h in d.hops
                          if h.entry is not None]
    facts = list({f.id: f for f in facts}.values())
    if failures:
        return TestOutcome(spec.name, "fail", facts,
                           message="unreachable: " + "; ".join(failures))
    return TestOutcome(spec.name, "pass", facts)


def run_preference_check(spec, state):
    rank = {ip: i for i, ip in enumerate(spec.ranking)}
    facts, problems, applicable = [], [], 0
    for host in _hosts(spec.host, state.hosts):
        by_prefix = {}
        for e in state.bgp_entries(host):
            if e.neighbor_ip in rank and (spec.prefix is None or e.prefix == spec.prefix):
                by_prefix.setdefault(e.prefix, []).append(e)
        for prefix, entries in sorted(by_prefix.items(),
                                      key=lambda kv: (int(kv[0].network_address), kv[0].prefixlen)):
            if len({e.neighbor_ip for e in entries}) < 2:
                continue
            applicable += 1
            best = [e for e in state.bgp_entries(host, prefix) if e.best]
            facts += [proto_fact(e) for e in best]
            top = min(rank[e.neighbor_ip] for e in entries)
            if not best or any(rank.get(e.neighbor_ip) != top for e in best):
                chosen = ", ".join(str(e.neighbor_ip) for e in best) or "nothing"
                problems.append(f"{host} {prefix}: selected {chosen}, expected "
                                f"{spec.ranking[top]}")
    if problems:
        return TestOutcome(spec.name, "fail", facts, message="; ".join(problems))
    msg = "" if applicable else "not applicable: no prefix learned from two ranked neighbors"
    return TestOutcome(spec.name, "pass", facts, message=msg)


def run_export_check(spec, state, network):
    facts, problems, edges = [], [], []
    for host in _hosts(spec.host, state.hosts):
        for e in state.edges:
            if e.send_host != host or not e.is_session or e.kind == "external-in":
                continue
            if spec.neighbor == "external" and e.kind != "external-out":
                continue
            if spec.neighbor not in ("*", "external") and \
                    e.recv_ip != ipaddress.IPv4Address(spec.neighbor):
                continue
            edges.append(e)
    if not edges:
        raise SuiteError(f"test {spec.name!r}: no established session matches")
    for e in edges:
        mo = message_origins(network, state, e, spec.prefix)
        sent = mo is not None and mo.sent.pre_import is not None
        if sent:
            facts.append(message_fact(e.id, spec.prefix, PRE_IMPORT, mo.sent.pre_import))
        else:
            facts += [proto_fact(x) for x in state.bgp_entries(e.send_host, spec.prefix)
                      if x.best]
        if sent != (spec.expect == "announced"):
            problems.append(f"{e.id}: {spec.prefix} {'announced' if sent else 'not announced'}")
    status = "fail" if problems else "pass"
    return TestOutcome(spec.name, status, facts, message="; ".join(problems))


# ---------------------------------------------------------------- control plane

def select_policies(selector, network):
    """(host, policy name) pairs picked by a PolicyCheck selector."""
    owned = {i.address.ip for c in network.configs.values() for i in c.interfaces
             if i.address is not None}
    out = set()
    for host in _hosts(selector.devices, network.hosts):
        cfg = network.config(host)
        bound = {}
        if cfg.bgp is not None:
            for n in cfg.bgp.neighbors:
                if selector.neighbor == "external" and n.ip in owned:
                    continue
                if selector.neighbor not in ("*", "external") and \
                        n.ip != ipaddress.IPv4Address(selector.neighbor):
                    continue
                es = resolve_peer_group(cfg, n.ip)
                bound.setdefault("import", set()).add(es.import_policy)
                bound.setdefault("export", set()).add(es.export_policy)
        for p in cfg.policies:
            if not fnmatchcase(p.name, selector.name):
                continue
            if selector.direction == "any" and selector.neighbor == "*":
                out.add((host, p.name))
            elif selector.direction == "any":
                if any(p.name in v for v in bound.values()):
                    out.add((host, p.name))
            elif p.name in bound.get(selector.direction, ()):
                out.add((host, p.name))
    return sorted(out)


def run_policy_check(spec, network):
    targets = select_policies(spec.selector, network)
    if not targets:
        raise SuiteError(f"test {spec.name!r}: policy selector matches no policy")
    direct, problems = set(), []
    for host, name in targets:
        cfg = network.config(host)
        for route in spec.routes:
            res = evaluate_policy(cfg.policy(name), route, cfg)
            direct.update(res.exercised)
            if res.outcome != spec.expect:
                problems.append(f"{host}/{name} {route.prefix}: {res.outcome}")
    status = "fail" if problems else "pass"
    return TestOutcome(spec.name, status, [], direct, "; ".join(problems))


# ---------------------------------------------------------------- suite

def run_test(spec, state, network):
    try:
        if isinstance(spec, RoutePresent):
            return run_route_present(spec, state)
        if isinstance(spec, Reachability):
            return run_reachability(spec, state)
        if isinstance(spec, PolicyCheck):
            return run_policy_check(spec, network)
        if isinstance(spec, ExportCheck):
            return run_export_check(spec, state, network)
        if isinstance(spec, PreferenceCheck):
            return run_preference_check(spec, state)
        raise SuiteError(f"unsupported test {spec!r}")
    except NetcovError as exc:
        return TestOutcome(spec.name, "error", message=str(exc))


def run_suite(suite, state, network, workers=1):
    """Run every test; seeds are the union of tested facts whatever the verdict."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda t: run_test(t, state, network), suite))
    else:
        outcomes = [run_test(t, state, network) for t in suite]
    seeds, direct = {}, set()
    for o in outcomes:
        for f in o.tested_facts:
            seeds.setdefault(f.id, f)
        direct |= o.direct_elements
    return outcomes, [seeds[k] for k in sorted(seeds, key=repr)], direct


def dataplane_coverage(seeds, state):
    """Share of main-RIB entries a suite examines, directly or along traced paths."""
    total = sum(len(v) for v in state.main.values())
    if total == 0:
        return 0.0
    tested = set()
    for f in seeds:
        if f.kind == MAIN:
            tested.add(f.key)
        elif f.kind == PATH:
            tested.update(f.payload.main_entries)
    return len(tested) / total


__all__ = [
    "dataplane_coverage", "run_export_check", "run_policy_check",
    "run_preference_check", "run_reachability", "run_route_present", "run_suite", "run_test",
    "select_policies",
]

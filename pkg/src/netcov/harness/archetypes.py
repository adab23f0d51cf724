"""Named test archetypes that expand into concrete tests.

A suite entry ``{"archetype": "NoMartian", ...}`` is replaced by the tests built
below. Some archetypes read the network or the converged state to pick their
targets (for instance which interfaces exist), so expansion happens after
simulation.
"""
from __future__ import annotations

import ipaddress
from fnmatch import fnmatchcase

from ..config.elements import resolve_peer_group
from ..errors import SuiteError
from ..routes import RouteAttrs
from .spec import (
    ExportCheck, PolicyCheck, PolicySelector, PreferenceCheck, Reachability, RoutePresent,
    route_template,
)

MARTIANS = (
    "0.0.0.0/8", "10.0.0.0/8", "127.0.0.0/8", "169.254.0.0/16", "172.16.0.0/12",
    "192.0.2.0/24", "192.168.0.0/16", "224.0.0.0/4", "240.0.0.0/4",
)
BTE_COMMUNITY = "65535:666"


def _need(network, state, name, what):
    if (network if what == "network" else state) is None:
        raise SuiteError(f"archetype {name} needs the {what} to expand")


def _external_ips(network):
    owned = {i.address.ip for c in network.configs.values() for i in c.interfaces
             if i.address is not None}
    out = []
    for host in network.hosts:
        bgp = network.config(host).bgp
        for n in (bgp.neighbors if bgp else ()):
            if n.ip not in owned:
                out.append((host, n))
    return out


def no_martian(d, network, state):
    routes = tuple(route_template({"prefix": p, "as_path": d.get("as_path", [])})
                   for p in d.get("prefixes", MARTIANS))
    sel = PolicySelector(devices=d.get("devices", "*"), direction="import",
                         neighbor=d.get("neighbor", "*"))
    return [PolicyCheck(d.get("name", "NoMartian"), sel, routes, "Reject")]


def block_to_external(d, network, state):
    """Export policies towards external peers must drop routes tagged with the BTE community."""
    community = d.get("community", BTE_COMMUNITY)
    if "routes" in d:
        routes = tuple(route_template(r) for r in d["routes"])
    else:
        _need(network, state, "BlockToExternal", "state")
        seen = {}
        for h in state.hosts:
            for e in state.bgp_entries(h):
                if e.best:
                    seen.setdefault(e.prefix, e.attrs)
        sample = sorted(seen, key=lambda p: (int(p.network_address), p.prefixlen))
        sample = sample[: d.get("samples", 8)]
        routes = tuple(RouteAttrs(p, as_path=seen[p].as_path,
                                  communities=seen[p].communities | {community})
                       for p in sample)
    if not routes:
        raise SuiteError("BlockToExternal: no routes to test")
    routes = tuple(r.evolve(communities=r.communities | {community}) for r in routes)
    sel = PolicySelector(devices=d.get("devices", "*"), direction="export", neighbor="external")
    return [PolicyCheck(d.get("name", "BlockToExternal"), sel, routes, "Reject")]


def sanity_in(d, network, state):
    sel = PolicySelector(devices=d.get("devices", "*"), direction="import",
                         name=d.get("policy", "SANITY-IN"))
    routes = tuple(route_template(r) for r in d["routes"])
    return [PolicyCheck(d.get("name", "SanityIn"), sel, routes, d.get("expect", "Reject"))]


def peer_specific_route(d, network, state):
    """Each external peer's import policy must accept prefixes from its own accept-lists."""
    _need(network, state, "PeerSpecificRoute", "network")
    out = []
    for host, n in _external_ips(network):
        if not fnmatchcase(host, d.get("devices", "*")):
            continue
        cfg = network.config(host)
        es = resolve_peer_group(cfg, n.ip)
        if es.import_policy is None or es.remote_as is None:
            continue
        routes = []
        for clause in cfg.policy(es.import_policy).clauses:
            if clause.outcome != "accept":
                continue
            for m in clause.matches:
                if m.kind != "prefix-list":
                    continue
                for entry in cfg.prefix_list(m.name).entries:
                    routes.append(RouteAttrs(entry.prefix, as_path=(es.remote_as,)))
        if routes:
            sel = PolicySelector(devices=host, direction="import", name=es.import_policy,
                                 neighbor=str(n.ip))
            out.append(PolicyCheck(f"{d.get('name', 'PeerSpecificRoute')}:{host}:{n.ip}", sel,
                                   tuple(dict.fromkeys(routes)), "Accept"))
    if not out:
        raise SuiteError("PeerSpecificRoute: no external peer has a prefix accept-list")
    return out


def route_preference(d, network, state):
    ranking = tuple(ipaddress.IPv4Address(x) for x in d["ranking"])
    prefix = d.get("prefix")
    return [PreferenceCheck(d.get("name", "RoutePreference"), ranking, d.get("host", "*"),
                            None if prefix is None else ipaddress.IPv4Network(prefix))]


def interface_reachability(d, network, state):
    _need(network, state, "InterfaceReachability", "network")
    ips = tuple(i.address.ip for h in network.hosts for i in network.config(h).interfaces
                if i.address is not None)
    return [Reachability(d.get("name", "InterfaceReachability"), d.get("src_host", "*"), ips,
                         exclude_self=True)]


def default_route_check(d, network, state):
    return [RoutePresent(d.get("name", "DefaultRouteCheck"), d.get("host", "*"),
                         ipaddress.IPv4Network("0.0.0.0/0"))]


def tor_pingmesh(d, network, state):
    _need(network, state, "ToRPingmesh", "network")
    pattern, iface = d.get("leaves", "leaf*"), d.get("interface", "eth0")
    ips = []
    for h in network.hosts:
        if fnmatchcase(h, pattern):
            i = network.config(h).interface(iface)
            if i is not None and i.address is not None:
                ips.append(i.address.ip)
    if not ips:
        raise SuiteError(f"ToRPingmesh: no {iface} address on {pattern}")
    return [Reachability(d.get("name", "ToRPingmesh"), pattern, tuple(ips), exclude_self=True)]


def export_aggregate(d, network, state):
    return [ExportCheck(d.get("name", "ExportAggregate"), d.get("host", "spine*"),
                        d.get("neighbor", "external"), ipaddress.IPv4Network(d["prefix"]))]


ARCHETYPES = {
    "BlockToExternal": block_to_external,
    "NoMartian": no_martian,
    "RoutePreference": route_preference,
    "SanityIn": sanity_in,
    "PeerSpecificRoute": peer_specific_route,
    "InterfaceReachability": interface_reachability,
    "DefaultRouteCheck": default_route_check,
    "ToRPingmesh": tor_pingmesh,
    "ExportAggregate": export_aggregate,
}


def expand(d, network=None, state=None):
    name = d["archetype"]
    fn = ARCHETYPES.get(name)
    if fn is None:
        raise SuiteError(f"unknown archetype {name!r}")
    return fn(d, network, state)


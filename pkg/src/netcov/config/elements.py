"""Typed configuration elements with line spans, and cross-reference analysis."""
from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from typing import NamedTuple, Optional

from ..errors import UnknownNeighbor

INTERFACE = "Interface"
BGP_PEER = "BgpPeer"
BGP_PEER_GROUP = "BgpPeerGroup"
POLICY_CLAUSE = "RoutePolicyClause"
PREFIX_LIST = "PrefixList"
COMMUNITY_LIST = "CommunityList"
ASPATH_LIST = "AsPathList"
STATIC_ROUTE = "StaticRoute"
AGGREGATE = "AggregateDef"
NETWORK = "NetworkStatement"
REDISTRIBUTION = "RedistributionDef"
ACL_RULE = "AclRuleDef"

ELEMENT_TYPES = (
    INTERFACE, BGP_PEER, BGP_PEER_GROUP, POLICY_CLAUSE, PREFIX_LIST, COMMUNITY_LIST,
    ASPATH_LIST, STATIC_ROUTE, AGGREGATE, NETWORK, REDISTRIBUTION, ACL_RULE,
)
ROOT_TYPES = frozenset({INTERFACE, BGP_PEER, STATIC_ROUTE, AGGREGATE, NETWORK, REDISTRIBUTION})
LIST_TYPES = {"prefix-list": PREFIX_LIST, "community-list": COMMUNITY_LIST, "as-path-list": ASPATH_LIST}


class ElementId(NamedTuple):
    host: str
    type: str
    name: str

    def __str__(self):
        return f"{self.host}|{self.type}|{self.name}"

    @classmethod
    def parse(cls, text):
        host, etype, name = text.split("|", 2)
        return cls(host, etype, name)


@dataclass(frozen=True)
class ConfigElement:
    id: ElementId
    line_span: tuple
    source_file: str
    referenced: bool
    container: Optional[str] = None  # e.g. "policy:SANITY-IN", "bgp", "acl:EDGE"

    @property
    def element_type(self):
        return self.id.type

    @property
    def lines(self):
        return range(self.line_span[0], self.line_span[1] + 1)


@dataclass(frozen=True)
class Container:
    """A stanza that groups elements; its own lines inherit its children's coverage."""
    host: str
    name: str
    span: tuple
    children: tuple  # ElementIds


def clause_name(policy, seq):
    return f"{policy}:{seq}"


def acl_rule_name(acl, seq):
    return f"{acl}:{seq}"


def element_id(host, etype, name):
    return ElementId(host, etype, str(name))


def _raw_elements(config):
    """Yield (etype, name, span, container) for every element in ``config``."""
    for i in config.interfaces:
        yield INTERFACE, i.name, i.span, None
    for s in config.static_routes:
        yield STATIC_ROUTE, s.name, s.span, None
    if config.bgp is not None:
        b = config.bgp
        for g in b.peer_groups:
            yield BGP_PEER_GROUP, g.name, g.span, "bgp"
        for n in b.neighbors:
            yield BGP_PEER, str(n.ip), n.span, "bgp"
        for net in b.networks:
            yield NETWORK, str(net.prefix), net.span, "bgp"
        for agg in b.aggregates:
            yield AGGREGATE, str(agg.prefix), agg.span, "bgp"
        for r in b.redistributions:
            yield REDISTRIBUTION, r.protocol, r.span, "bgp"
    for p in config.policies:
        for c in p.clauses:
            yield POLICY_CLAUSE, clause_name(p.name, c.seq), c.span, f"policy:{p.name}"
    for pl in config.prefix_lists:
        yield PREFIX_LIST, pl.name, pl.span, None
    for cl in config.community_lists:
        yield COMMUNITY_LIST, cl.name, cl.span, None
    for al in config.aspath_lists:
        yield ASPATH_LIST, al.name, al.span, None
    for a in config.acls:
        for r in a.rules:
            yield ACL_RULE, acl_rule_name(a.name, r.seq), r.span, f"acl:{a.name}"


def element_spans(config):
    return [(f"{t} {n}", span) for t, n, span, _ in _raw_elements(config)]


def top_level_spans(config):
    spans = [(f"interface {i.name}", i.span) for i in config.interfaces]
    spans += [(f"static-route {s.name}", s.span) for s in config.static_routes]
    if config.bgp is not None:
        spans.append(("bgp", config.bgp.span))
    for kind, items in (("policy", config.policies), ("prefix-list", config.prefix_lists),
                        ("community-list", config.community_lists),
                        ("as-path-list", config.aspath_lists), ("acl", config.acls)):
        spans += [(f"{kind} {x.name}", x.span) for x in items]
    if config.device_line:
        spans.append(("device", (config.device_line, config.device_line)))
    return spans


def containers(config):
    host = config.hostname
    out = []
    if config.bgp is not None:
        kids = [element_id(host, t, n) for t, n, _, c in _raw_elements(config) if c == "bgp"]
        out.append(Container(host, "bgp", config.bgp.span, tuple(kids)))
    for p in config.policies:
        kids = tuple(element_id(host, POLICY_CLAUSE, clause_name(p.name, c.seq)) for c in p.clauses)
        out.append(Container(host, f"policy:{p.name}", p.span, kids))
    for a in config.acls:
        kids = tuple(element_id(host, ACL_RULE, acl_rule_name(a.name, r.seq)) for r in a.rules)
        out.append(Container(host, f"acl:{a.name}", a.span, kids))
    return out


@dataclass(frozen=True)
class EffectivePeerSettings:
    neighbor_ip: ipaddress.IPv4Address
    remote_as: Optional[int]
    import_policy: Optional[str]
    export_policy: Optional[str]
    peer_group: Optional[str]
    contributors: tuple  # ElementIds of the peer and (if any) its group


def resolve_peer_group(config, neighbor_ip):
    """Merge a neighbor's settings with its peer group's; neighbor values win."""
    bgp = config.bgp
    n = bgp.neighbor(neighbor_ip) if bgp is not None else None
    if n is None:
        raise UnknownNeighbor(f"{config.hostname} has no neighbor {neighbor_ip}")
    host = config.hostname
    contributors = [element_id(host, BGP_PEER, n.ip)]
    remote_as, imp, exp = n.remote_as, n.import_policy, n.export_policy
    if n.peer_group is not None:
        g = bgp.peer_group(n.peer_group)
        contributors.append(element_id(host, BGP_PEER_GROUP, g.name))
        remote_as = remote_as if remote_as is not None else g.remote_as
        imp = imp if imp is not None else g.import_policy
        exp = exp if exp is not None else g.export_policy
    return EffectivePeerSettings(n.ip, remote_as, imp, exp, n.peer_group, tuple(contributors))


def _referenced_ids(config):
    host = config.hostname
    refs = set()
    bound_policies = set()
    bound_acls = set()
    for i in config.interfaces:
        bound_acls.update(x for x in (i.acl_in, i.acl_out) if x)
    if config.bgp is not None:
        b = config.bgp
        used_groups = {n.peer_group for n in b.neighbors if n.peer_group}
        for g in b.peer_groups:
            if g.name in used_groups:
                refs.add(element_id(host, BGP_PEER_GROUP, g.name))
                bound_policies.update(x for x in (g.import_policy, g.export_policy) if x)
        for n in b.neighbors:
            bound_policies.update(x for x in (n.import_policy, n.export_policy) if x)
        bound_policies.update(r.policy for r in b.redistributions if r.policy)
    for p in config.policies:
        if p.name not in bound_policies:
            continue
        for c in p.clauses:
            refs.add(element_id(host, POLICY_CLAUSE, clause_name(p.name, c.seq)))
            for m in c.matches:
                refs.add(element_id(host, LIST_TYPES[m.kind], m.name))
    for a in config.acls:
        if a.name in bound_acls:
            refs.update(element_id(host, ACL_RULE, acl_rule_name(a.name, r.seq)) for r in a.rules)
    return refs


def extract_elements(config):
    """Return every configuration element of ``config``, ordered by first line."""
    host = config.hostname
    refs = _referenced_ids(config)
    out = []
    for etype, name, span, container in _raw_elements(config):
        eid = element_id(host, etype, name)
        out.append(ConfigElement(
            id=eid,
            line_span=tuple(span),
            source_file=config.source_file,
            referenced=etype in ROOT_TYPES or eid in refs,
            container=container,
        ))
    out.sort(key=lambda e: (e.line_span, e.id))
    return out

"""Device configuration model.

All objects are frozen dataclasses. Line spans are carried along but excluded
from equality so that a pretty-printed and re-parsed config compares equal to
the original.
"""
from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from typing import Optional

Span = tuple  # (first_line, last_line), inclusive, 1-based


def _span():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class InterfaceDef:
    name: str
    address: Optional[ipaddress.IPv4Interface] = None
    acl_in: Optional[str] = None
    acl_out: Optional[str] = None
    span: Span = _span()

    @property
    def prefix(self):
        return self.address.network if self.address is not None else None


@dataclass(frozen=True)
class StaticRoute:
    prefix: ipaddress.IPv4Network
    nexthop: ipaddress.IPv4Address
    span: Span = _span()

    @property
    def name(self):
        return f"{self.prefix}->{self.nexthop}"


@dataclass(frozen=True)
class PeerGroupDef:
    name: str
    remote_as: Optional[int] = None
    import_policy: Optional[str] = None
    export_policy: Optional[str] = None
    span: Span = _span()


@dataclass(frozen=True)
class NeighborDef:
    ip: ipaddress.IPv4Address
    remote_as: Optional[int] = None
    peer_group: Optional[str] = None
    import_policy: Optional[str] = None
    export_policy: Optional[str] = None
    span: Span = _span()


@dataclass(frozen=True)
class NetworkDef:
    prefix: ipaddress.IPv4Network
    span: Span = _span()


@dataclass(frozen=True)
class AggregateDef:
    prefix: ipaddress.IPv4Network
    summary_only: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class RedistributionDef:
    protocol: str  # "connected" | "static"
    policy: Optional[str] = None
    span: Span = _span()


@dataclass(frozen=True)
class BgpProcess:
    local_as: int
    multipath: int = 1
    networks: tuple = ()
    aggregates: tuple = ()
    redistributions: tuple = ()
    peer_groups: tuple = ()
    neighbors: tuple = ()
    span: Span = _span()

    def neighbor(self, ip) -> Optional[NeighborDef]:
        ip = ipaddress.IPv4Address(ip)
        for n in self.neighbors:
            if n.ip == ip:
                return n
        return None

    def peer_group(self, name) -> Optional[PeerGroupDef]:
        for g in self.peer_groups:
            if g.name == name:
                return g
        return None


@dataclass(frozen=True)
class MatchCond:
    kind: str  # "prefix-list" | "community-list" | "as-path-list"
    name: str


@dataclass(frozen=True)
class Action:
    kind: str  # "local-preference" | "community"
    value: object  # int for local-preference, tuple of "x:y" for community
    additive: bool = False


ACCEPT = "accept"
REJECT = "reject"
FALLTHROUGH = "fallthrough"


@dataclass(frozen=True)
class Clause:
    seq: int
    matches: tuple = ()
    actions: tuple = ()
    outcome: str = FALLTHROUGH
    span: Span = _span()


@dataclass(frozen=True)
class RoutePolicy:
    name: str
    clauses: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class PrefixListEntry:
    prefix: ipaddress.IPv4Network
    ge: Optional[int] = None
    le: Optional[int] = None


@dataclass(frozen=True)
class PrefixList:
    name: str
    entries: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class CommunityList:
    name: str
    communities: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class AsPathList:
    name: str
    patterns: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class AclRule:
    seq: int
    action: str  # "permit" | "deny"
    proto: str  # "ip" | "tcp" | "udp" | "icmp"
    src: ipaddress.IPv4Network
    dst: ipaddress.IPv4Network
    dst_port: Optional[int] = None
    span: Span = _span()


@dataclass(frozen=True)
class AclDef:
    name: str
    rules: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class DeviceConfig:
    hostname: str
    interfaces: tuple = ()
    bgp: Optional[BgpProcess] = None
    policies: tuple = ()
    prefix_lists: tuple = ()
    community_lists: tuple = ()
    aspath_lists: tuple = ()
    static_routes: tuple = ()
    acls: tuple = ()
    source_file: str = field(default="", compare=False)
    line_count: int = field(default=0, compare=False)
    device_line: int = field(default=0, compare=False, repr=False)
    token_lines: frozenset = field(default=frozenset(), compare=False, repr=False)

    def interface(self, name) -> Optional[InterfaceDef]:
        for i in self.interfaces:
            if i.name == name:
                return i
        return None

    def policy(self, name) -> Optional[RoutePolicy]:
        return _by_name(self.policies, name)

    def prefix_list(self, name) -> Optional[PrefixList]:
        return _by_name(self.prefix_lists, name)

    def community_list(self, name) -> Optional[CommunityList]:
        return _by_name(self.community_lists, name)

    def aspath_list(self, name) -> Optional[AsPathList]:
        return _by_name(self.aspath_lists, name)

    def acl(self, name) -> Optional[AclDef]:
        return _by_name(self.acls, name)

    def owned_addresses(self):
        return {i.address.ip: i.name for i in self.interfaces if i.address is not None}


def _by_name(items, name):
    for item in items:
        if item.name == name:
            return item
    return None

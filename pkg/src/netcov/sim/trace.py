"""Data-plane path tracing over a (possibly partial) stable state."""
from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from typing import Optional

from ..errors import Loop, NoRoute

MAX_HOPS = 64


@dataclass(frozen=True)
class Hop:
    host: str
    entry: Optional[tuple]  # main RIB entry key used to forward; None at the delivering device
    in_iface: Optional[str]
    out_iface: Optional[str]
    acls: tuple = ()  # ACL entry keys that permitted the packet at this hop

    def to_json(self):
        return {"host": self.host, "entry": None if self.entry is None else list(self.entry),
                "in_iface": self.in_iface, "out_iface": self.out_iface,
                "acls": [list(a) for a in self.acls]}


@dataclass(frozen=True)
class Path:
    src_host: str
    src_ip: ipaddress.IPv4Address
    dst_ip: ipaddress.IPv4Address
    proto: str
    dst_port: Optional[int]
    hops: tuple
    outcome: str = "delivered"  # or "exited" when the packet leaves the modeled network

    @property
    def key(self):
        return (self.src_host, str(self.src_ip), str(self.dst_ip), self.proto, self.dst_port,
                tuple((h.host, h.entry, h.in_iface, h.out_iface, h.acls) for h in self.hops))

    @property
    def main_entries(self):
        return [h.entry for h in self.hops if h.entry is not None]

    @property
    def acl_entries(self):
        return [a for h in self.hops for a in h.acls]


@dataclass(frozen=True)
class Drop:
    hops: tuple
    reason: str  # "acl" | "no-route" | "null-route" | "loop"
    blocking_acl: Optional[tuple] = None  # ACL entry key that denied, if any


@dataclass
class TraceResult:
    paths: list = field(default_factory=list)
    drops: list = field(default_factory=list)

    @property
    def reachable(self):
        return bool(self.paths)

    def require(self, host, dst_ip):
        if self.paths:
            return self.paths
        loops = [d for d in self.drops if d.reason == "loop"]
        if loops and len(loops) == len(self.drops):
            raise Loop([h.host for h in loops[0].hops])
        raise NoRoute(host, dst_ip)


def _check_acl(state, host, acl_name, src_ip, dst_ip, proto, dst_port):
    """Return (permitted, entry) for the first matching rule; no match is an implicit deny."""
    if acl_name is None:
        return True, None
    for entry in state.acl(host, acl_name):
        if entry.matches(src_ip, dst_ip, proto, dst_port):
            return entry.action == "permit", entry
    return False, None


def trace_path(state, src_host, src_ip, dst_ip, proto="tcp", dst_port=None, max_hops=MAX_HOPS):
    """Enumerate every forwarding path (all ECMP branches) from ``src_host``.

    Longest-prefix match at each hop; ingress and egress ACLs are applied per
    interface. Denied, unroutable and looping branches are reported as drops.
    """
    src_ip = ipaddress.IPv4Address(src_ip)
    dst_ip = ipaddress.IPv4Address(dst_ip)
    result = TraceResult()
    pkt = (src_ip, dst_ip, proto, dst_port)

    def visit(host, in_iface, hops, visited):
        acl_hits = ()
        if in_iface is not None:
            iface = state.interface(host, in_iface)
            ok, entry = _check_acl(state, host, iface.acl_in if iface else None, *pkt)
            if entry is not None and ok:
                acl_hits = (entry.key,)
            if not ok:
                result.drops.append(Drop(hops + (Hop(host, None, in_iface, None),), "acl",
                                         entry.key if entry else None))
                return
        if state.owns(host, dst_ip):
            result.paths.append(Path(src_host, src_ip, dst_ip, proto, dst_port,
                                     hops + (Hop(host, None, in_iface, None, acl_hits),)))
            return
        if host in visited or len(hops) >= max_hops:
            result.drops.append(Drop(hops + (Hop(host, None, in_iface, None, acl_hits),), "loop"))
            return
        entries = state.lookup_lpm(host, dst_ip)
        if not entries:
            result.drops.append(Drop(hops + (Hop(host, None, in_iface, None, acl_hits),), "no-route"))
            return
        for entry in entries:
            targets = state.forwarding_targets(host, entry, dst_ip)
            if not targets:
                result.drops.append(Drop(hops + (Hop(host, entry.key, in_iface, None, acl_hits),),
                                         "null-route"))
                continue
            for out_iface, _next_ip in targets:
                iface = state.interface(host, out_iface)
                ok, acl = _check_acl(state, host, iface.acl_out if iface else None, *pkt)
                hits = acl_hits + ((acl.key,) if acl is not None and ok else ())
                hop = Hop(host, entry.key, in_iface, out_iface, hits)
                if not ok:
                    result.drops.append(Drop(hops + (hop,), "acl", acl.key if acl else None))
                    continue
                peer = state.link_peer(host, out_iface)
                if peer is None:
                    result.paths.append(Path(src_host, src_ip, dst_ip, proto, dst_port,
                                             hops + (hop,), outcome="exited"))
                else:
                    visit(peer[0], peer[1], hops + (hop,), visited | {host})

    visit(src_host, None, (), frozenset())
    return result

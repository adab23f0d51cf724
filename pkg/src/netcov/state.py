"""Indexed, immutable store of a converged control-plane snapshot.

Lookups that come back empty raise :class:`NotFound`: the inference engine
assumes the snapshot is complete, so a miss means the snapshot and the query
disagree.
"""
from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass
from typing import Optional

from .config.elements import ElementId
from .errors import Ambiguous, NotFound, SnapshotError
from .lpm import PrefixTrie
from .routes import RouteAttrs

SCHEMA = "netcov.snapshot/1"
ADMIN_DISTANCE = {"connected": 0, "static": 1, "bgp": 20, "aggregate": 20}
MAX_RESOLUTION_DEPTH = 16
_ANY = object()


def _ip(x):
    return None if x is None else ipaddress.IPv4Address(x)


def _s(x):
    return None if x is None else str(x)


@dataclass(frozen=True)
class MainRibEntry:
    host: str
    prefix: ipaddress.IPv4Network
    protocol: str
    nexthop: Optional[ipaddress.IPv4Address] = None
    out_interface: Optional[str] = None

    @property
    def key(self):
        return (self.host, str(self.prefix), self.protocol, _s(self.nexthop), self.out_interface)

    @property
    def admin(self):
        return ADMIN_DISTANCE[self.protocol]

    def sort_key(self):
        return (int(self.prefix.network_address), self.prefix.prefixlen,
                int(self.nexthop) if self.nexthop is not None else -1, self.out_interface or "",
                self.protocol)

    def to_json(self):
        return {"host": self.host, "prefix": str(self.prefix), "protocol": self.protocol,
                "nexthop": _s(self.nexthop), "out_interface": self.out_interface}

    @classmethod
    def from_json(cls, d):
        return cls(d["host"], ipaddress.IPv4Network(d["prefix"]), d["protocol"], _ip(d["nexthop"]),
                   d["out_interface"])


@dataclass(frozen=True)
class LocalRibEntry:
    """Connected or static protocol RIB entry."""
    host: str
    protocol: str
    prefix: ipaddress.IPv4Network
    nexthop: Optional[ipaddress.IPv4Address]
    interface: Optional[str]
    element: ElementId

    @property
    def key(self):
        tail = self.interface if self.protocol == "connected" else _s(self.nexthop)
        return (self.host, self.protocol, str(self.prefix), tail)

    def to_json(self):
        return {"host": self.host, "protocol": self.protocol, "prefix": str(self.prefix),
                "nexthop": _s(self.nexthop), "interface": self.interface,
                "element": list(self.element)}

    @classmethod
    def from_json(cls, d):
        return cls(d["host"], d["protocol"], ipaddress.IPv4Network(d["prefix"]), _ip(d["nexthop"]),
                   d["interface"], ElementId(*d["element"]))


@dataclass(frozen=True)
class BgpRibEntry:
    host: str
    attrs: RouteAttrs
    source: str  # routing-edge id for learned routes, else "network" / "aggregate"
    kind: str  # "ebgp" | "ibgp" | "external" | "redistribution" | "local"
    best: bool = False
    element: Optional[ElementId] = None  # NetworkStatement / AggregateDef for local routes
    neighbor_ip: Optional[ipaddress.IPv4Address] = None

    @property
    def prefix(self):
        return self.attrs.prefix

    @property
    def received_from(self):
        return None if self.kind == "local" else self.source

    @property
    def key(self):
        return (self.host, "bgp", str(self.attrs.prefix), self.source)

    def to_json(self):
        return {"host": self.host, "attrs": self.attrs.to_json(), "source": self.source,
                "kind": self.kind, "best": self.best,
                "element": None if self.element is None else list(self.element),
                "neighbor_ip": _s(self.neighbor_ip)}

    @classmethod
    def from_json(cls, d):
        return cls(d["host"], RouteAttrs.from_json(d["attrs"]), d["source"], d["kind"], d["best"],
                   None if d["element"] is None else ElementId(*d["element"]), _ip(d["neighbor_ip"]))


@dataclass(frozen=True)
class AclEntry:
    host: str
    acl: str
    seq: int
    action: str
    proto: str
    src: ipaddress.IPv4Network
    dst: ipaddress.IPv4Network
    dst_port: Optional[int]
    elements: tuple  # ElementIds of the rule definitions

    @property
    def key(self):
        return (self.host, self.acl, self.seq)

    def matches(self, src_ip, dst_ip, proto, dst_port):
        if self.proto != "ip" and self.proto != proto:
            return False
        if src_ip not in self.src or dst_ip not in self.dst:
            return False
        return self.dst_port is None or self.dst_port == dst_port

    def to_json(self):
        return {"host": self.host, "acl": self.acl, "seq": self.seq, "action": self.action,
                "proto": self.proto, "src": str(self.src), "dst": str(self.dst),
                "dst_port": self.dst_port, "elements": [list(e) for e in self.elements]}

    @classmethod
    def from_json(cls, d):
        return cls(d["host"], d["acl"], d["seq"], d["action"], d["proto"],
                   ipaddress.IPv4Network(d["src"]), ipaddress.IPv4Network(d["dst"]), d["dst_port"],
                   tuple(ElementId(*e) for e in d["elements"]))


@dataclass(frozen=True)
class RoutingEdge:
    id: str
    kind: str  # "ebgp" | "ibgp" | "redistribution" | "external-in" | "external-out"
    send_host: str
    recv_host: str
    send_ip: Optional[ipaddress.IPv4Address] = None
    recv_ip: Optional[ipaddress.IPv4Address] = None
    send_as: Optional[int] = None
    recv_as: Optional[int] = None
    export_policy: Optional[str] = None
    import_policy: Optional[str] = None
    send_elements: tuple = ()
    recv_elements: tuple = ()
    protocol: Optional[str] = None  # redistributed protocol

    @property
    def is_session(self):
        return self.kind in ("ebgp", "ibgp", "external-in", "external-out")

    @property
    def is_external(self):
        return self.kind.startswith("external")

    @property
    def elements(self):
        return tuple(self.send_elements) + tuple(self.recv_elements)

    def to_json(self):
        return {"id": self.id, "kind": self.kind, "send_host": self.send_host,
                "recv_host": self.recv_host, "send_ip": _s(self.send_ip), "recv_ip": _s(self.recv_ip),
                "send_as": self.send_as, "recv_as": self.recv_as,
                "export_policy": self.export_policy, "import_policy": self.import_policy,
                "send_elements": [list(e) for e in self.send_elements],
                "recv_elements": [list(e) for e in self.recv_elements],
                "protocol": self.protocol}

    @classmethod
    def from_json(cls, d):
        return cls(d["id"], d["kind"], d["send_host"], d["recv_host"], _ip(d["send_ip"]),
                   _ip(d["recv_ip"]), d["send_as"], d["recv_as"], d["export_policy"],
                   d["import_policy"], tuple(ElementId(*e) for e in d["send_elements"]),
                   tuple(ElementId(*e) for e in d["recv_elements"]), d["protocol"])


@dataclass(frozen=True)
class InterfaceState:
    host: str
    name: str
    address: Optional[ipaddress.IPv4Interface]
    acl_in: Optional[str] = None
    acl_out: Optional[str] = None
    up: bool = True

    def to_json(self):
        return {"host": self.host, "name": self.name,
                "address": None if self.address is None else self.address.with_prefixlen,
                "acl_in": self.acl_in, "acl_out": self.acl_out, "up": self.up}

    @classmethod
    def from_json(cls, d):
        addr = None if d["address"] is None else ipaddress.IPv4Interface(d["address"])
        return cls(d["host"], d["name"], addr, d["acl_in"], d["acl_out"], d["up"])


def edge_id(send_host, send_ip, recv_host, recv_ip):
    return f"{send_host}[{send_ip}]->{recv_host}[{recv_ip}]"


def _ordered(entries, key):
    return sorted(entries, key=key)


class StableState:
    """Converged snapshot with the lookups the inference rules need.

    Containers are treated as read-only after construction; indexes are built
    eagerly so concurrent readers never race on lazy initialisation.
    """

    def __init__(self, *, interfaces, links, local_as, connected, static, bgp, main, edges, acls,
                 announcements=None, rounds=0):
        self.interfaces = {h: dict(v) for h, v in interfaces.items()}
        self.links = dict(links)  # (host, iface) -> (host, iface)
        self.local_as = dict(local_as)
        self.connected = {h: _ordered(v, lambda e: e.key) for h, v in connected.items()}
        self.static = {h: _ordered(v, lambda e: e.key) for h, v in static.items()}
        self.bgp = {h: _ordered(v, lambda e: (int(e.prefix.network_address), e.prefix.prefixlen,
                                               e.source)) for h, v in bgp.items()}
        self.main = {h: _ordered(v, MainRibEntry.sort_key) for h, v in main.items()}
        self.edges = sorted(edges, key=lambda e: e.id)
        self.acls = {h: {n: sorted(r, key=lambda a: a.seq) for n, r in v.items()}
                     for h, v in acls.items()}
        # (peer_device, external neighbor ip) -> announced RouteAttrs
        self.announcements = {k: sorted(v, key=lambda r: (int(r.prefix.network_address),
                                                          r.prefix.prefixlen))
                              for k, v in (announcements or {}).items()}
        self.rounds = rounds
        self.taint = None
        self._index()

    # indexes
    def _index(self):
        self._tries = {}
        self._main_by_key = {}
        for host, entries in self.main.items():
            trie = PrefixTrie()
            for e in entries:
                trie.insert(e.prefix, e)
                self._main_by_key[e.key] = e
            self._tries[host] = trie
        self._bgp_by_prefix = {}
        self._bgp_by_key = {}
        for host, entries in self.bgp.items():
            for e in entries:
                self._bgp_by_prefix.setdefault((host, e.prefix), []).append(e)
                self._bgp_by_key[e.key] = e
        self._local_by_key = {}
        for table in (self.connected, self.static):
            for entries in table.values():
                for e in entries:
                    self._local_by_key[e.key] = e
        self._edge_by_id = {e.id: e for e in self.edges}
        self._edge_by_recv = {}
        for e in self.edges:
            if e.send_ip is not None:
                self._edge_by_recv.setdefault((e.recv_host, e.send_ip), []).append(e)
        self._acl_by_key = {}
        for host, tables in self.acls.items():
            for entries in tables.values():
                for a in entries:
                    self._acl_by_key[a.key] = a
        self._owner = {}
        for host, ifaces in self.interfaces.items():
            for i in ifaces.values():
                if i.address is not None and i.up:
                    self._owner[i.address.ip] = (host, i.name)

    @property
    def hosts(self):
        return sorted(self.interfaces)

    # lookups used by inference
    def lookup_bgp(self, host, prefix, nexthop=_ANY, best=None):
        prefix = ipaddress.IPv4Network(prefix)
        found = []
        for e in self._bgp_by_prefix.get((host, prefix), ()):
            if nexthop is not _ANY and e.attrs.nexthop != _ip(nexthop):
                continue
            if best is not None and e.best != best:
                continue
            found.append(e)
        if not found:
            raise NotFound(f"no BGP entry {host} {prefix} nexthop={'*' if nexthop is _ANY else nexthop}"
                           f" best={best}")
        return sorted(found, key=lambda e: (_sort_ip(e.attrs.nexthop), e.source))

    def bgp_entries(self, host, prefix=None):
        if prefix is None:
            return list(self.bgp.get(host, ()))
        return list(self._bgp_by_prefix.get((host, ipaddress.IPv4Network(prefix)), ()))

    def lookup_lpm(self, host, ip, exclude=None):
        trie = self._tries.get(host)
        if trie is None:
            return []
        _, values = trie.longest(ip, exclude=exclude)
        return sorted(values, key=lambda e: (_sort_ip(e.nexthop), e.out_interface or ""))

    def main_entries(self, host, prefix=None):
        if prefix is None:
            return list(self.main.get(host, ()))
        trie = self._tries.get(host)
        return [] if trie is None else sorted(trie.exact(prefix), key=MainRibEntry.sort_key)

    def lookup_edge(self, recv_host, send_ip):
        found = self._edge_by_recv.get((recv_host, _ip(send_ip)), [])
        if not found:
            raise NotFound(f"no routing edge into {recv_host} from {send_ip}")
        if len(found) > 1:
            raise Ambiguous(f"{len(found)} edges into {recv_host} from {send_ip}")
        return found[0]

    def edge(self, eid):
        try:
            return self._edge_by_id[eid]
        except KeyError:
            raise NotFound(f"no routing edge {eid}") from None

    def has_edge(self, eid):
        return eid in self._edge_by_id

    def main_entry(self, key):
        try:
            return self._main_by_key[tuple(key)]
        except KeyError:
            raise NotFound(f"no main RIB entry {key}") from None

    def bgp_entry(self, key):
        try:
            return self._bgp_by_key[tuple(key)]
        except KeyError:
            raise NotFound(f"no BGP RIB entry {key}") from None

    def local_entry(self, key):
        try:
            return self._local_by_key[tuple(key)]
        except KeyError:
            raise NotFound(f"no protocol RIB entry {key}") from None

    def acl_entry(self, key):
        try:
            return self._acl_by_key[tuple(key)]
        except KeyError:
            raise NotFound(f"no ACL entry {key}") from None

    def local_entries(self, host, protocol, prefix=None):
        table = self.connected if protocol == "connected" else self.static
        out = table.get(host, [])
        if prefix is not None:
            prefix = ipaddress.IPv4Network(prefix)
            out = [e for e in out if e.prefix == prefix]
        return list(out)

    # forwarding helpers
    def owner(self, ip):
        return self._owner.get(_ip(ip))

    def owns(self, host, ip):
        o = self._owner.get(_ip(ip))
        return o is not None and o[0] == host

    def link_peer(self, host, iface):
        return self.links.get((host, iface))

    def interface(self, host, name):
        return self.interfaces.get(host, {}).get(name)

    def announced(self, host, neighbor_ip):
        return list(self.announcements.get((host, _ip(neighbor_ip)), ()))

    def acl(self, host, name):
        return self.acls.get(host, {}).get(name, [])

    def resolve_nexthop(self, host, nexthop, exclude=None):
        """ECMP set of main entries resolving ``nexthop`` (skipping the route's own prefix)."""
        return self.lookup_lpm(host, nexthop, exclude=exclude)

    def forwarding_targets(self, host, entry, dst_ip, depth=0):
        """(out_interface, next_ip) pairs the packet may take when ``entry`` is hit."""
        if entry.protocol == "connected":
            return [(entry.out_interface, _ip(dst_ip))]
        if entry.nexthop is None:
            return []
        if depth >= MAX_RESOLUTION_DEPTH:
            return []
        out = set()
        for r in self.resolve_nexthop(host, entry.nexthop, exclude=entry.prefix):
            if r.protocol == "connected":
                out.add((r.out_interface, entry.nexthop))
            else:
                out.update(self.forwarding_targets(host, r, entry.nexthop, depth + 1))
        return sorted(out, key=lambda t: (t[0], int(t[1])))

    # serialization
    def to_json(self):
        return {
            "schema": SCHEMA,
            "rounds": self.rounds,
            "interfaces": [i.to_json() for h in self.hosts for i in
                           sorted(self.interfaces[h].values(), key=lambda i: i.name)],
            "links": sorted([[a[0], a[1], b[0], b[1]] for a, b in self.links.items()]),
            "local_as": {h: self.local_as[h] for h in sorted(self.local_as)},
            "connected": [e.to_json() for h in sorted(self.connected) for e in self.connected[h]],
            "static": [e.to_json() for h in sorted(self.static) for e in self.static[h]],
            "bgp": [e.to_json() for h in sorted(self.bgp) for e in self.bgp[h]],
            "main": [e.to_json() for h in sorted(self.main) for e in self.main[h]],
            "edges": [e.to_json() for e in self.edges],
            "acls": [a.to_json() for h in sorted(self.acls) for n in sorted(self.acls[h])
                     for a in self.acls[h][n]],
            "announcements": [
                {"peer_device": dev, "peer_neighbor_ip": str(ip),
                 "routes": [r.to_json() for r in self.announcements[(dev, ip)]]}
                for dev, ip in sorted(self.announcements, key=lambda k: (k[0], int(k[1])))
            ],
        }

    @classmethod
    def from_json(cls, d):
        if d.get("schema") != SCHEMA:
            raise SnapshotError(f"unsupported snapshot schema {d.get('schema')!r}")
        interfaces = {}
        for raw in d["interfaces"]:
            i = InterfaceState.from_json(raw)
            interfaces.setdefault(i.host, {})[i.name] = i
        links = {(a, ai): (b, bi) for a, ai, b, bi in d["links"]}

        def group(items, parse):
            out = {h: [] for h in interfaces}
            for raw in items:
                e = parse(raw)
                out.setdefault(e.host, []).append(e)
            return out

        acls = {h: {} for h in interfaces}
        for raw in d["acls"]:
            a = AclEntry.from_json(raw)
            acls.setdefault(a.host, {}).setdefault(a.acl, []).append(a)
        return cls(
            interfaces=interfaces,
            links=links,
            local_as=d["local_as"],
            connected=group(d["connected"], LocalRibEntry.from_json),
            static=group(d["static"], LocalRibEntry.from_json),
            bgp=group(d["bgp"], BgpRibEntry.from_json),
            main=group(d["main"], MainRibEntry.from_json),
            edges=[RoutingEdge.from_json(e) for e in d["edges"]],
            acls=acls,
            announcements={
                (a["peer_device"], ipaddress.IPv4Address(a["peer_neighbor_ip"])):
                    [RouteAttrs.from_json(r) for r in a["routes"]]
                for a in d.get("announcements", [])
            },
            rounds=d.get("rounds", 0),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def __eq__(self, other):
        return isinstance(other, StableState) and self.to_json() == other.to_json()

    __hash__ = None


def _sort_ip(ip):
    return -1 if ip is None else int(ip)

"""External operating environment: injected announcements and failed links."""
from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass, field

from ..config.elements import resolve_peer_group
from ..errors import InvalidEnvironment, UnknownNeighbor
from ..routes import RouteAttrs


@dataclass(frozen=True)
class Announcement:
    peer_device: str
    peer_neighbor_ip: ipaddress.IPv4Address
    routes: tuple


@dataclass(frozen=True)
class Environment:
    external_announcements: tuple = ()
    link_failures: frozenset = field(default_factory=frozenset)

    def to_json(self):
        return {
            "external_announcements": [
                {"peer_device": a.peer_device, "peer_neighbor_ip": str(a.peer_neighbor_ip),
                 "routes": [_route_json(r) for r in a.routes]}
                for a in self.external_announcements
            ],
            "link_failures": sorted(self.link_failures),
        }

    @classmethod
    def from_json(cls, d):
        anns = []
        for a in d.get("external_announcements", []):
            ip = ipaddress.IPv4Address(a["peer_neighbor_ip"])
            routes = []
            for r in a.get("routes", []):
                routes.append(RouteAttrs(
                    prefix=ipaddress.IPv4Network(r["prefix"]),
                    nexthop=ip,
                    as_path=tuple(r.get("as_path", ())),
                    communities=frozenset(r.get("communities", ())),
                    local_pref=r.get("local_pref", 100),
                ))
            anns.append(Announcement(a["peer_device"], ip, tuple(routes)))
        return cls(tuple(anns), frozenset(d.get("link_failures", ())))

    def validate(self, network):
        link_ids = {link.id for link in network.links}
        for lid in self.link_failures:
            if lid not in link_ids:
                raise InvalidEnvironment(f"unknown link {lid!r} in link_failures")
        for a in self.external_announcements:
            cfg = network.configs.get(a.peer_device)
            if cfg is None:
                raise InvalidEnvironment(f"announcement targets unknown device {a.peer_device}")
            try:
                es = resolve_peer_group(cfg, a.peer_neighbor_ip)
            except UnknownNeighbor:
                raise InvalidEnvironment(
                    f"{a.peer_device} has no neighbor {a.peer_neighbor_ip}") from None
            for r in a.routes:
                if not r.as_path or r.as_path[0] != es.remote_as:
                    raise InvalidEnvironment(
                        f"route {r.prefix} from {a.peer_neighbor_ip}: AS path {list(r.as_path)} "
                        f"does not start with remote-as {es.remote_as}")

    def announcements(self):
        out = {}
        for a in self.external_announcements:
            out.setdefault((a.peer_device, a.peer_neighbor_ip), []).extend(a.routes)
        return out


def _route_json(r):
    return {"prefix": str(r.prefix), "as_path": list(r.as_path),
            "communities": sorted(r.communities), "local_pref": r.local_pref}


def load_environment(path):
    if path is None:
        return Environment()
    with open(path, encoding="utf-8") as fh:
        return Environment.from_json(json.load(fh))

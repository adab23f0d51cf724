"""Route attribute record shared by the policy evaluator, simulator and inference engine."""
from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field, replace
from typing import Optional

ORIGIN_PROTOCOLS = ("bgp", "connected", "static", "aggregate")


@dataclass(frozen=True)
class RouteAttrs:
    prefix: ipaddress.IPv4Network
    nexthop: Optional[ipaddress.IPv4Address] = None
    as_path: tuple = ()
    communities: frozenset = field(default_factory=frozenset)
    local_pref: int = 100
    origin_protocol: str = "bgp"

    def __post_init__(self):
        if not isinstance(self.prefix, ipaddress.IPv4Network):
            object.__setattr__(self, "prefix", ipaddress.IPv4Network(self.prefix))
        if self.nexthop is not None and not isinstance(self.nexthop, ipaddress.IPv4Address):
            object.__setattr__(self, "nexthop", ipaddress.IPv4Address(self.nexthop))
        object.__setattr__(self, "as_path", tuple(int(a) for a in self.as_path))
        object.__setattr__(self, "communities", frozenset(self.communities))
        if any(a < 0 for a in self.as_path):
            raise ValueError("AS numbers must be non-negative")
        if self.local_pref < 0:
            raise ValueError("local_pref must be non-negative")
        if self.origin_protocol not in ORIGIN_PROTOCOLS:
            raise ValueError(f"unknown origin protocol {self.origin_protocol!r}")

    def evolve(self, **changes):
        return replace(self, **changes)

    def to_json(self):
        return {
            "prefix": str(self.prefix),
            "nexthop": None if self.nexthop is None else str(self.nexthop),
            "as_path": list(self.as_path),
            "communities": sorted(self.communities),
            "local_pref": self.local_pref,
            "origin_protocol": self.origin_protocol,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            prefix=ipaddress.IPv4Network(d["prefix"]),
            nexthop=None if d.get("nexthop") is None else ipaddress.IPv4Address(d["nexthop"]),
            as_path=tuple(d.get("as_path", ())),
            communities=frozenset(d.get("communities", ())),
            local_pref=d.get("local_pref", 100),
            origin_protocol=d.get("origin_protocol", "bgp"),
        )

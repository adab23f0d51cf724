"""Declarative test definitions and the suite file format."""
from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass, field
from typing import Optional

from ..errors import SuiteError
from ..routes import RouteAttrs

KINDS = ("RoutePresent", "Reachability", "PolicyCheck", "ExportCheck", "PreferenceCheck")


@dataclass(frozen=True)
class RoutePresent:
    name: str
    host: str  # glob
    prefix: ipaddress.IPv4Network
    protocol: Optional[str] = None


@dataclass(frozen=True)
class Reachability:
    name: str
    src_host: str  # glob
    dst_ips: tuple  # IPv4Address
    src_ip: Optional[ipaddress.IPv4Address] = None
    proto: str = "icmp"
    dst_port: Optional[int] = None
    exclude_self: bool = False


@dataclass(frozen=True)
class PolicySelector:
    devices: str = "*"
    direction: str = "any"  # "import" | "export" | "any"
    name: str = "*"  # glob over policy names
    neighbor: str = "*"  # "*", "external", or a neighbor IP


@dataclass(frozen=True)
class PolicyCheck:
    name: str
    selector: PolicySelector
    routes: tuple  # RouteAttrs templates
    expect: str  # "Accept" | "Reject"


@dataclass(frozen=True)
class ExportCheck:
    name: str
    host: str  # glob
    neighbor: str  # "*", "external", or an IP
    prefix: ipaddress.IPv4Network
    expect: str = "announced"  # or "not-announced"


@dataclass(frozen=True)
class PreferenceCheck:
    name: str
    ranking: tuple  # neighbor IPs, most preferred first
    host: str = "*"
    prefix: Optional[ipaddress.IPv4Network] = None


@dataclass
class TestOutcome:
    name: str
    status: str  # "pass" | "fail" | "error"
    tested_facts: list = field(default_factory=list)
    direct_elements: set = field(default_factory=set)
    message: str = ""

    __test__ = False  # not a pytest class


def route_template(d):
    return RouteAttrs(
        prefix=ipaddress.IPv4Network(d["prefix"]),
        as_path=tuple(d.get("as_path", ())),
        communities=frozenset(d.get("communities", ())),
        local_pref=d.get("local_pref", 100),
    )


def _ips(d):
    if "dst_ip" in d:
        return (ipaddress.IPv4Address(d["dst_ip"]),)
    if "dst_ips" in d:
        return tuple(ipaddress.IPv4Address(x) for x in d["dst_ips"])
    prefixes = d.get("dst_prefixes") or ([d["dst_prefix"]] if "dst_prefix" in d else [])
    if not prefixes:
        raise SuiteError(f"test {d.get('name')!r}: Reachability needs a destination")
    return tuple(_first_host(ipaddress.IPv4Network(p)) for p in prefixes)


def _first_host(net):
    return net.network_address if net.prefixlen >= 31 else net.network_address + 1


def parse_test(d):
    """Build one TestSpec from its JSON object."""
    try:
        kind, name = d["kind"], d["name"]
        if kind == "RoutePresent":
            return RoutePresent(name, d["host"], ipaddress.IPv4Network(d["prefix"]),
                                d.get("protocol"))
        if kind == "Reachability":
            src_ip = d.get("src_ip")
            return Reachability(name, d["src_host"], _ips(d),
                                None if src_ip is None else ipaddress.IPv4Address(src_ip),
                                d.get("proto", "icmp"), d.get("dst_port"),
                                bool(d.get("exclude_self", False)))
        if kind == "PolicyCheck":
            sel = d.get("selector", {})
            expect = d["expect"]
            if expect not in ("Accept", "Reject"):
                raise SuiteError(f"test {name!r}: expect must be Accept or Reject")
            return PolicyCheck(name, PolicySelector(**sel),
                               tuple(route_template(r) for r in d["routes"]), expect)
        if kind == "ExportCheck":
            expect = d.get("expect", "announced")
            if expect not in ("announced", "not-announced"):
                raise SuiteError(f"test {name!r}: bad expect {expect!r}")
            return ExportCheck(name, d["host"], str(d.get("neighbor", "*")),
                               ipaddress.IPv4Network(d["prefix"]), expect)
        if kind == "PreferenceCheck":
            prefix = d.get("prefix")
            return PreferenceCheck(name, tuple(ipaddress.IPv4Address(x) for x in d["ranking"]),
                                   d.get("host", "*"),
                                   None if prefix is None else ipaddress.IPv4Network(prefix))
    except (KeyError, TypeError, ValueError) as exc:
        raise SuiteError(f"malformed test {d!r}: {exc}") from None
    raise SuiteError(f"unknown test kind {d.get('kind')!r}")


def load_suite(path_or_obj, network=None, state=None):
    """Parse a suite file (or already-loaded JSON); archetype entries are expanded."""
    from .archetypes import expand

    raw = path_or_obj
    if isinstance(raw, str):
        with open(raw, encoding="utf-8") as fh:
            raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("tests", [])
    out = []
    for d in raw:
        if "archetype" in d:
            out.extend(expand(d, network, state))
        else:
            out.append(parse_test(d))
    names = [t.name for t in out]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise SuiteError(f"duplicate test names: {', '.join(dupes)}")
    return out

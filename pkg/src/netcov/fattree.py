"""Three-tier fat-tree generator: configs, topology, environment and test suite.

A ``k``-ary fat-tree has ``k`` pods of ``k/2`` leaves and ``k/2`` aggregation
routers, plus ``(k/2)**2`` spines, for ``5*k*k/4`` devices in total. Every
router runs eBGP with its own AS number. Spines hold a WAN session that
supplies the default route and receives the ``10.0.0.0/8`` aggregate.
"""
from __future__ import annotations

import ipaddress
import json
import os

LINK_BASE = ipaddress.IPv4Address("172.16.0.0")
WAN_BASE = ipaddress.IPv4Address("203.0.113.0")
WAN_AS = 64512
AGGREGATE = "10.0.0.0/8"


def device_count(k):
    return 5 * k * k // 4


def _leaf_subnet(i):
    return ipaddress.IPv4Interface(f"10.{i >> 8}.{i & 255}.1/24")


class _Device:
    def __init__(self, name, asn):
        self.name, self.asn = name, asn
        self.interfaces = []  # (name, IPv4Interface)
        self.neighbors = []  # (ip, remote_as, import, export)

    def add_interface(self, name, addr):
        self.interfaces.append((name, addr))


def build(k):
    """Return (devices, links) for a k-ary fat-tree."""
    if k < 2 or k % 2:
        raise ValueError("fat-tree arity k must be an even number >= 2")
    half = k // 2
    leaves = [_Device(f"leaf{i}", 65100 + i) for i in range(1, k * half + 1)]
    aggs = [_Device(f"agg{i}", 65200 + i) for i in range(1, k * half + 1)]
    spines = [_Device(f"spine{i}", 65300 + i) for i in range(1, half * half + 1)]
    links = []
    counter = [0]

    def connect(a, a_if, b, b_if):
        base = LINK_BASE + 4 * counter[0]
        counter[0] += 1
        ia = ipaddress.IPv4Interface(f"{base + 1}/30")
        ib = ipaddress.IPv4Interface(f"{base + 2}/30")
        a.add_interface(a_if, ia)
        b.add_interface(b_if, ib)
        a.neighbors.append((ib.ip, b.asn, None, None))
        b.neighbors.append((ia.ip, a.asn, None, None))
        links.append({"deviceA": a.name, "ifaceA": a_if, "deviceB": b.name, "ifaceB": b_if})

    for i, leaf in enumerate(leaves, start=1):
        leaf.add_interface("eth0", _leaf_subnet(i))
    for pod in range(k):
        pod_leaves = leaves[pod * half:(pod + 1) * half]
        pod_aggs = aggs[pod * half:(pod + 1) * half]
        for li, leaf in enumerate(pod_leaves):
            for ai, agg in enumerate(pod_aggs):
                connect(leaf, f"eth{ai + 1}", agg, f"eth{li + 1}")
        for ai, agg in enumerate(pod_aggs):
            for si in range(half):
                spine = spines[ai * half + si]
                connect(agg, f"eth{half + si + 1}", spine, f"eth{pod + 1}")
    for s, spine in enumerate(spines):
        base = WAN_BASE + 4 * s
        spine.add_interface("wan0", ipaddress.IPv4Interface(f"{base + 1}/30"))
        spine.neighbors.append((base + 2, WAN_AS, "WAN-IN", "WAN-OUT"))
    return leaves, aggs, spines, links


def _render(dev, role, index, k):
    out = [f"# fat-tree k={k}: {role} {index}", f"device {dev.name};", ""]
    for name, addr in dev.interfaces:
        out += [f"interface {name} {{", f"  address {addr.with_prefixlen};", "}"]
    out += ["", "bgp {", f"  local-as {dev.asn};", "  multipath 4;"]
    if role == "leaf":
        out.append(f"  network {dev.interfaces[0][1].network};")
    if role == "spine":
        out.append(f"  aggregate {AGGREGATE};")
    for ip, asn, imp, exp in dev.neighbors:
        out.append(f"  neighbor {ip} {{")
        out.append(f"    remote-as {asn};")
        if imp:
            out.append(f"    import-policy {imp};")
        if exp:
            out.append(f"    export-policy {exp};")
        out.append("  }")
    out.append("}")
    if role == "spine":
        out += [
            "",
            "policy WAN-IN {",
            "  clause 10 {",
            "    match prefix-list DEFAULT;",
            "    accept;",
            "  }",
            "  clause 20 {",
            "    reject;",
            "  }",
            "}",
            "policy WAN-OUT {",
            "  clause 10 {",
            "    match prefix-list AGGREGATE;",
            "    accept;",
            "  }",
            "  clause 20 {",
            "    reject;",
            "  }",
            "}",
            "prefix-list DEFAULT {",
            "  0.0.0.0/0;",
            "}",
            "prefix-list AGGREGATE {",
            f"  {AGGREGATE};",
            "}",
        ]
    return "\n".join(out) + "\n"


def environment(spines):
    anns = []
    for s in spines:
        ip = next(n[0] for n in s.neighbors if n[1] == WAN_AS)
        anns.append({"peer_device": s.name, "peer_neighbor_ip": str(ip),
                     "routes": [{"prefix": "0.0.0.0/0", "as_path": [WAN_AS]}]})
    return {"external_announcements": anns, "link_failures": []}


def suite():
    return {"tests": [
        {"archetype": "DefaultRouteCheck", "name": "DefaultRouteCheck"},
        {"archetype": "ToRPingmesh", "name": "ToRPingmesh", "leaves": "leaf*"},
        {"archetype": "ExportAggregate", "name": "ExportAggregate", "host": "spine*",
         "prefix": AGGREGATE},
    ]}


def generate(k, out_dir):
    """Write configs/, topology.json, environment.json and suite.json under ``out_dir``."""
    leaves, aggs, spines, links = build(k)
    cfg_dir = os.path.join(out_dir, "configs")
    os.makedirs(cfg_dir, exist_ok=True)
    for role, group in (("leaf", leaves), ("agg", aggs), ("spine", spines)):
        for i, dev in enumerate(group, start=1):
            with open(os.path.join(cfg_dir, f"{dev.name}.cfg"), "w", encoding="utf-8") as fh:
                fh.write(_render(dev, role, i, k))
    for name, obj in (("topology.json", links), ("environment.json", environment(spines)),
                      ("suite.json", suite())):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=1)
            fh.write("\n")
    return len(leaves) + len(aggs) + len(spines)

"""Canonical pretty-printer for :class:`DeviceConfig`; output re-parses to an equal model."""


def _peer_lines(obj, indent, with_group):
    out = []
    if obj.remote_as is not None:
        out.append(f"{indent}remote-as {obj.remote_as};")
    if with_group and obj.peer_group is not None:
        out.append(f"{indent}peer-group {obj.peer_group};")
    if obj.import_policy is not None:
        out.append(f"{indent}import-policy {obj.import_policy};")
    if obj.export_policy is not None:
        out.append(f"{indent}export-policy {obj.export_policy};")
    return out


def format_config(config):
    lines = [f"device {config.hostname};"]
    for i in config.interfaces:
        lines.append(f"interface {i.name} {{")
        if i.address is not None:
            lines.append(f"  address {i.address.with_prefixlen};")
        if i.acl_in:
            lines.append(f"  acl-in {i.acl_in};")
        if i.acl_out:
            lines.append(f"  acl-out {i.acl_out};")
        lines.append("}")
    for s in config.static_routes:
        lines.append(f"static-route {s.prefix} next-hop {s.nexthop};")
    if config.bgp is not None:
        b = config.bgp
        lines.append("bgp {")
        lines.append(f"  local-as {b.local_as};")
        if b.multipath != 1:
            lines.append(f"  multipath {b.multipath};")
        for n in b.networks:
            lines.append(f"  network {n.prefix};")
        for a in b.aggregates:
            lines.append(f"  aggregate {a.prefix}{' summary-only' if a.summary_only else ''};")
        for r in b.redistributions:
            lines.append(f"  redistribute {r.protocol}{' policy ' + r.policy if r.policy else ''};")
        for g in b.peer_groups:
            lines.append(f"  peer-group {g.name} {{")
            lines += _peer_lines(g, "    ", with_group=False)
            lines.append("  }")
        for n in b.neighbors:
            lines.append(f"  neighbor {n.ip} {{")
            lines += _peer_lines(n, "    ", with_group=True)
            lines.append("  }")
        lines.append("}")
    for p in config.policies:
        lines.append(f"policy {p.name} {{")
        for c in p.clauses:
            lines.append(f"  clause {c.seq} {{")
            for m in c.matches:
                lines.append(f"    match {m.kind} {m.name};")
            for a in c.actions:
                if a.kind == "local-preference":
                    lines.append(f"    set local-preference {a.value};")
                else:
                    extra = " additive" if a.additive else ""
                    lines.append(f"    set community {' '.join(a.value)}{extra};")
            lines.append(f"    {c.outcome};")
            lines.append("  }")
        lines.append("}")
    for pl in config.prefix_lists:
        lines.append(f"prefix-list {pl.name} {{")
        for e in pl.entries:
            bounds = (f" ge {e.ge}" if e.ge is not None else "") + (f" le {e.le}" if e.le is not None else "")
            lines.append(f"  {e.prefix}{bounds};")
        lines.append("}")
    for cl in config.community_lists:
        lines.append(f"community-list {cl.name} {{")
        lines += [f"  {c};" for c in cl.communities]
        lines.append("}")
    for al in config.aspath_lists:
        lines.append(f"as-path-list {al.name} {{")
        lines += [f'  "{p}";' for p in al.patterns]
        lines.append("}")
    for a in config.acls:
        lines.append(f"acl {a.name} {{")
        for r in a.rules:
            port = f" dst-port {r.dst_port}" if r.dst_port is not None else ""
            lines.append(f"  {r.seq} {r.action} {r.proto} {r.src} {r.dst}{port};")
        lines.append("}")
    return "\n".join(lines) + "\n"

"""Synchronous-round control-plane simulator.

Each round reads only the previous round's snapshot: sessions are re-checked
against its forwarding state, routes are pushed across every established edge,
local origination (network statements, aggregates, redistribution) is applied,
best paths are selected and the main RIBs are rebuilt. The loop stops when a
round reproduces its input.
"""
from __future__ import annotations

from ..config.elements import (
    ACL_RULE, AGGREGATE, INTERFACE, NETWORK, REDISTRIBUTION, STATIC_ROUTE, acl_rule_name,
    element_id, resolve_peer_group,
)
from ..errors import NonConvergence
from ..routes import RouteAttrs
from ..state import (
    AclEntry, BgpRibEntry, InterfaceState, LocalRibEntry, MainRibEntry, RoutingEdge, StableState,
    edge_id,
)
from .environment import Environment
from .propagation import (
    export_candidates, is_learned, message_origins, multipath_key, rank_key, receive_external,
    redistribute, transfer,
)
from .trace import trace_path

BGP_PORT = 179


def round_limit(n_devices):
    return 4 * n_devices + 16


# ---------------------------------------------------------------- static inputs

def _interface_states(network, failed):
    down = set()
    for link in network.links:
        if link.id in failed:
            down.update({(link.device_a, link.iface_a), (link.device_b, link.iface_b)})
    out = {}
    for host in network.hosts:
        out[host] = {
            i.name: InterfaceState(host, i.name, i.address, i.acl_in, i.acl_out,
                                   up=(host, i.name) not in down)
            for i in network.config(host).interfaces
        }
    return out


def _link_map(network, failed):
    out = {}
    for link in network.links:
        if link.id in failed:
            continue
        out[(link.device_a, link.iface_a)] = (link.device_b, link.iface_b)
        out[(link.device_b, link.iface_b)] = (link.device_a, link.iface_a)
    return out


def derive_local_routes(network, failed_links=()):
    """Connected and static protocol RIBs, one entry per addressed interface / static stanza."""
    interfaces = _interface_states(network, frozenset(failed_links))
    connected, static = {}, {}
    for host in network.hosts:
        cfg = network.config(host)
        connected[host] = [
            LocalRibEntry(host, "connected", i.address.network, None, i.name,
                          element_id(host, INTERFACE, i.name))
            for i in cfg.interfaces
            if i.address is not None and interfaces[host][i.name].up
        ]
        static[host] = [
            LocalRibEntry(host, "static", s.prefix, s.nexthop, None,
                          element_id(host, STATIC_ROUTE, s.name))
            for s in cfg.static_routes
        ]
    return connected, static


def _acl_tables(network):
    out = {}
    for host in network.hosts:
        tables = {}
        for acl in network.config(host).acls:
            tables[acl.name] = [
                AclEntry(host, acl.name, r.seq, r.action, r.proto, r.src, r.dst, r.dst_port,
                         (element_id(host, ACL_RULE, acl_rule_name(acl.name, r.seq)),))
                for r in acl.rules
            ]
        out[host] = tables
    return out


def _address_owners(network):
    owners = {}
    for host in network.hosts:
        for i in network.config(host).interfaces:
            if i.address is not None:
                owners[i.address.ip] = (host, i.name)
    return owners


# ---------------------------------------------------------------- sessions

def _pair_neighbors(network, owners):
    """Match configured neighbors into candidate internal sessions and external peers."""
    claims, externals = {}, []
    for a in network.hosts:
        bgp = network.config(a).bgp
        if bgp is None:
            continue
        for n in sorted(bgp.neighbors, key=lambda n: int(n.ip)):
            o = owners.get(n.ip)
            if o is None:
                externals.append((a, n.ip))
            elif o[0] != a:
                claims.setdefault((a, o[0]), []).append(n.ip)
    pairs = []
    for (a, b), xs in sorted(claims.items()):
        if a > b:
            continue
        free = sorted(claims.get((b, a), []), key=int)
        for x in sorted(xs, key=int):
            if not free:
                break
            x_net = network.config(b).interface(owners[x][1]).address.network
            same = [y for y in free
                    if network.config(a).interface(owners[y][1]).address.network == x_net]
            y = same[0] if same else free[0]
            free.remove(y)
            pairs.append((a, x, b, y))
    return pairs, externals


def _delivered(result):
    return [p for p in result.paths if p.outcome == "delivered"]


def _exited(result):
    return [p for p in result.paths if p.outcome == "exited"]


def session_paths(state, edge):
    """(forward, backward) path lists that keep a session edge up in ``state``."""
    if edge.kind in ("external-in", "external-out"):
        host = edge.recv_host if edge.kind == "external-in" else edge.send_host
        local_ip = edge.recv_ip if edge.kind == "external-in" else edge.send_ip
        peer_ip = edge.send_ip if edge.kind == "external-in" else edge.recv_ip
        return _exited(trace_path(state, host, local_ip, peer_ip, "tcp", BGP_PORT)), []
    fwd = _delivered(trace_path(state, edge.send_host, edge.send_ip, edge.recv_ip, "tcp",
                                BGP_PORT))
    bwd = _delivered(trace_path(state, edge.recv_host, edge.recv_ip, edge.send_ip, "tcp",
                                BGP_PORT))
    return fwd, bwd


def establish_sessions(network, state):
    """Routing edges that come up over the forwarding state in ``state``."""
    owners = _address_owners(network)
    pairs, externals = _pair_neighbors(network, owners)
    edges = []
    for a, x, b, y in pairs:
        cfg_a, cfg_b = network.config(a), network.config(b)
        if cfg_b.bgp is None:
            continue
        es_a, es_b = resolve_peer_group(cfg_a, x), resolve_peer_group(cfg_b, y)
        as_a, as_b = cfg_a.bgp.local_as, cfg_b.bgp.local_as
        if es_a.remote_as != as_b or es_b.remote_as != as_a:
            continue
        kind = "ibgp" if as_a == as_b else "ebgp"
        ab = RoutingEdge(edge_id(a, y, b, x), kind, a, b, y, x, as_a, as_b,
                         es_a.export_policy, es_b.import_policy,
                         es_a.contributors, es_b.contributors)
        fwd, bwd = session_paths(state, ab)
        if not fwd or not bwd:
            continue
        edges.append(ab)
        edges.append(RoutingEdge(edge_id(b, x, a, y), kind, b, a, x, y, as_b, as_a,
                                 es_b.export_policy, es_a.import_policy,
                                 es_b.contributors, es_a.contributors))
    for a, x in externals:
        cfg = network.config(a)
        es = resolve_peer_group(cfg, x)
        if es.remote_as is None:
            continue
        src = next((i.address.ip for i in cfg.interfaces
                    if i.address is not None and state.interface(a, i.name).up
                    and x in i.address.network), None)
        if src is None:
            continue
        ext = f"ext:{x}"
        out_edge = RoutingEdge(edge_id(a, src, ext, x), "external-out", a, ext, src, x,
                               cfg.bgp.local_as, es.remote_as, es.export_policy, None,
                               es.contributors, ())
        if not session_paths(state, out_edge)[0]:
            continue
        edges.append(out_edge)
        edges.append(RoutingEdge(edge_id(ext, x, a, src), "external-in", ext, a, x, src,
                                 es.remote_as, cfg.bgp.local_as, None, es.import_policy,
                                 (), es.contributors))
    for host in network.hosts:
        bgp = network.config(host).bgp
        if bgp is None:
            continue
        for r in bgp.redistributions:
            edges.append(RoutingEdge(
                f"{host}:redistribute:{r.protocol}", "redistribution", host, host,
                send_as=bgp.local_as, recv_as=bgp.local_as, export_policy=r.policy,
                send_elements=(element_id(host, REDISTRIBUTION, r.protocol),),
                protocol=r.protocol))
    return sorted(edges, key=lambda e: e.id)


def redistribution_origins(state, edge, prefix=None):
    """Protocol RIB entries that are active in the main RIB and feed ``edge``."""
    host = edge.send_host
    active = {(m.prefix, m.nexthop, m.out_interface) for m in state.main_entries(host)
              if m.protocol == edge.protocol}
    out = []
    for r in state.local_entries(host, edge.protocol, prefix):
        key = (r.prefix, r.nexthop, r.interface) if edge.protocol == "connected" else \
            (r.prefix, r.nexthop, None)
        if key in active:
            out.append(r)
    return out


def network_origins(state, host, prefix):
    """Non-BGP main entries backing a network statement."""
    return [m for m in state.main_entries(host, prefix) if m.protocol in ("connected", "static")]


def aggregate_contributors(state, host, prefix):
    return [e for e in state.bgp_entries(host) if e.best and e.prefix != prefix
            and e.prefix.subnet_of(prefix)]


# ---------------------------------------------------------------- one round

def _candidates(network, view, edges, announcements):
    """Every BGP RIB candidate for the next round, keyed by host."""
    cands = {h: [] for h in network.hosts}
    for host in network.hosts:
        bgp = network.config(host).bgp
        if bgp is None:
            continue
        for net in bgp.networks:
            if network_origins(view, host, net.prefix):
                cands[host].append(BgpRibEntry(
                    host, RouteAttrs(net.prefix), "network", "local",
                    element=element_id(host, NETWORK, net.prefix)))
        for agg in bgp.aggregates:
            if aggregate_contributors(view, host, agg.prefix):
                cands[host].append(BgpRibEntry(
                    host, RouteAttrs(agg.prefix, origin_protocol="aggregate"), "aggregate",
                    "local", element=element_id(host, AGGREGATE, agg.prefix)))
    for edge in edges:
        if edge.kind == "redistribution":
            prefixes = sorted({r.prefix for r in redistribution_origins(view, edge)},
                              key=lambda p: (int(p.network_address), p.prefixlen))
            for prefix in prefixes:
                tr = redistribute(network, edge, prefix, edge.protocol)
                if tr.delivered:
                    cands[edge.recv_host].append(BgpRibEntry(
                        edge.recv_host, tr.post_import, edge.id, "redistribution"))
        elif edge.kind == "external-in":
            for attrs in announcements.get((edge.recv_host, edge.send_ip), ()):
                tr = receive_external(network, edge, attrs)
                if tr.delivered:
                    cands[edge.recv_host].append(BgpRibEntry(
                        edge.recv_host, tr.post_import, edge.id, "external",
                        neighbor_ip=edge.send_ip))
        elif edge.kind in ("ebgp", "ibgp"):
            by_prefix = {}
            for e in export_candidates(network, view, edge):
                by_prefix.setdefault(e.prefix, []).append(e)
            for prefix in sorted(by_prefix, key=lambda p: (int(p.network_address), p.prefixlen)):
                primary = min(by_prefix[prefix], key=rank_key)
                tr = transfer(network, edge, primary.attrs)
                if tr.delivered:
                    cands[edge.recv_host].append(BgpRibEntry(
                        edge.recv_host, tr.post_import, edge.id, edge.kind,
                        neighbor_ip=edge.send_ip))
    return cands


def select_best(entries, multipath):
    """Mark BEST entries for one (host, prefix) candidate set."""
    ranked = sorted(entries, key=rank_key)
    top = ranked[0]
    if is_learned(top):
        group = [e for e in ranked if is_learned(e) and multipath_key(e) == multipath_key(top)]
        best = {id(e) for e in group[:max(1, multipath)]}
    else:
        best = {id(top)}
    return [BgpRibEntry(e.host, e.attrs, e.source, e.kind, id(e) in best, e.element,
                        e.neighbor_ip) for e in ranked]


def _select(network, cands):
    out = {}
    for host, entries in cands.items():
        bgp = network.config(host).bgp
        k = bgp.multipath if bgp is not None else 1
        groups = {}
        for e in entries:
            groups.setdefault(e.prefix, []).append(e)
        out[host] = [x for p in groups for x in select_best(groups[p], k)]
    return out


def _resolvable(view, host, entry):
    return bool(view.forwarding_targets(host, entry, entry.nexthop))


def _rebuild_main(network, view, connected, static, bgp):
    main = {}
    for host in network.hosts:
        cands = [MainRibEntry(host, r.prefix, "connected", None, r.interface)
                 for r in connected[host]]
        for r in static[host]:
            m = MainRibEntry(host, r.prefix, "static", r.nexthop)
            if _resolvable(view, host, m):
                cands.append(m)
        for e in bgp[host]:
            if not e.best:
                continue
            if e.source == "aggregate":
                cands.append(MainRibEntry(host, e.prefix, "aggregate"))
            elif e.attrs.nexthop is not None:
                m = MainRibEntry(host, e.prefix, "bgp", e.attrs.nexthop)
                if _resolvable(view, host, m):
                    cands.append(m)
        by_prefix = {}
        for m in cands:
            by_prefix.setdefault(m.prefix, []).append(m)
        entries = []
        for group in by_prefix.values():
            low = min(m.admin for m in group)
            entries += sorted({m for m in group if m.admin == low}, key=MainRibEntry.sort_key)
        main[host] = entries
    return main


# ---------------------------------------------------------------- taint oracle

class _Taint:
    """Forward taint: the set of config elements each fact was derived from."""

    def __init__(self, network):
        self.network = network
        self.main, self.bgp, self.edge = {}, {}, {}

    def path(self, view_taint, path, state):
        out = set()
        for key in path.main_entries:
            out |= view_taint.main.get(key, frozenset())
        for key in path.acl_entries:
            out.update(state.acl_entry(key).elements)
        return out

    def step(self, prev, view, new_state):
        """Compute this round's taints from ``prev`` (taints of ``view``)."""
        net = self.network
        t = _Taint(net)
        for e in new_state.edges:
            s = set(e.elements)
            if e.kind != "redistribution":
                for paths in session_paths(view, e):
                    for p in paths:
                        s |= self.path(prev, p, view)
            t.edge[e.id] = frozenset(s)
        for host in net.hosts:
            for r in new_state.bgp_entries(host):
                t.bgp[r.key] = frozenset(self._bgp(prev, view, new_state, t, r))
        memo = {}
        for host in net.hosts:
            for m in new_state.main_entries(host):
                t.main[m.key] = self._main(new_state, t, m, memo)
        return t

    def _bgp(self, prev, view, new_state, t, r):
        net = self.network
        host = r.host
        if r.source == "network":
            s = {r.element}
            for m in network_origins(view, host, r.prefix):
                s |= prev.main.get(m.key, frozenset())
            return s
        if r.source == "aggregate":
            s = {r.element}
            for c in aggregate_contributors(view, host, r.prefix):
                s |= prev.bgp.get(c.key, frozenset())
            return s
        edge = new_state.edge(r.source)
        s = set(t.edge[edge.id])
        if edge.kind == "redistribution":
            for o in redistribution_origins(view, edge, r.prefix):
                s.add(o.element)
            s.update(redistribute(net, edge, r.prefix, edge.protocol).export_exercised)
            return s
        if edge.kind == "external-in":
            for attrs in view.announced(host, edge.send_ip):
                if attrs.prefix == r.prefix:
                    tr = receive_external(net, edge, attrs)
                    if tr.post_import == r.attrs:
                        s.update(tr.import_exercised)
            return s
        mo = message_origins(net, view, edge, r.prefix)
        if mo is not None and mo.sent.post_import == r.attrs:
            s.update(mo.sent.import_exercised)
            for o, ex in mo.origins:
                s |= prev.bgp.get(o.key, frozenset())
                s.update(ex)
        return s

    def _main(self, state, t, m, memo):
        if m.key in memo:
            return memo[m.key]
        memo[m.key] = frozenset()  # guards against resolution cycles
        host = m.host
        s = set()
        if m.protocol == "connected":
            for r in state.local_entries(host, "connected", m.prefix):
                if r.interface == m.out_interface:
                    s.add(r.element)
        elif m.protocol == "static":
            for r in state.local_entries(host, "static", m.prefix):
                if r.nexthop == m.nexthop:
                    s.add(r.element)
        elif m.protocol == "aggregate":
            for e in state.bgp_entries(host, m.prefix):
                if e.best and e.source == "aggregate":
                    s |= t.bgp[e.key]
        else:
            for e in state.bgp_entries(host, m.prefix):
                if e.best and e.attrs.nexthop == m.nexthop:
                    s |= t.bgp[e.key]
        if m.nexthop is not None:
            for g in state.resolve_nexthop(host, m.nexthop, exclude=m.prefix):
                s |= self._main(state, t, g, memo)
        memo[m.key] = frozenset(s)
        return memo[m.key]

    def snapshot(self):
        return {"main": dict(self.main), "bgp": dict(self.bgp), "edge": dict(self.edge)}

    def __eq__(self, other):
        return (self.main, self.bgp, self.edge) == (other.main, other.bgp, other.edge)


def path_taint(state, path):
    """Elements a traced path depends on, per the taint recorded on ``state``."""
    out = set()
    for key in path.main_entries:
        out |= state.taint["main"][key]
    for key in path.acl_entries:
        out.update(state.acl_entry(key).elements)
    return out


# ---------------------------------------------------------------- driver

def propagate_to_fixed_point(network, environment=None, *, taint=False):
    """Run synchronous rounds until the tables stop changing.

    With ``taint=True`` every fact also carries the set of configuration
    elements it was derived from, and the loop additionally waits for those
    sets to settle. Raises :class:`NonConvergence` after ``4*devices+16``
    rounds (doubled when tainting, since taint lags the tables).
    """
    environment = environment or Environment()
    environment.validate(network)
    failed = frozenset(environment.link_failures)
    announcements = environment.announcements()
    interfaces = _interface_states(network, failed)
    links = _link_map(network, failed)
    local_as = {h: (network.config(h).bgp.local_as if network.config(h).bgp else None)
                for h in network.hosts}
    connected, static = derive_local_routes(network, failed)
    acls = _acl_tables(network)

    def view(bgp, main, edges, rounds):
        return StableState(interfaces=interfaces, links=links, local_as=local_as,
                           connected=connected, static=static, bgp=bgp, main=main, edges=edges,
                           acls=acls, announcements=announcements, rounds=rounds)

    main0 = {h: [MainRibEntry(h, r.prefix, "connected", None, r.interface) for r in connected[h]]
             for h in network.hosts}
    current = view({h: [] for h in network.hosts}, main0, [], 0)
    tracker = _Taint(network) if taint else None
    limit = round_limit(len(network.hosts)) * (2 if taint else 1)
    for rnd in range(1, limit + 1):
        edges = establish_sessions(network, current)
        bgp = _select(network, _candidates(network, current, edges, announcements))
        main = _rebuild_main(network, current, connected, static, bgp)
        nxt = view(bgp, main, edges, rnd)
        stable = _tables(nxt) == _tables(current)
        if tracker is not None:
            new_tracker = tracker.step(tracker, current, nxt)
            stable = stable and new_tracker == tracker
            tracker = new_tracker
        if stable:
            current.rounds = rnd
            if tracker is not None:
                current.taint = tracker.snapshot()
            return current
        current = nxt
    raise NonConvergence(limit)


def _tables(state):
    return (
        frozenset(e for h in state.bgp for e in state.bgp[h]),
        frozenset(e for h in state.main for e in state.main[h]),
        frozenset(state.edges),
    )


def simulate(network, environment=None, **kw):
    return propagate_to_fixed_point(network, environment, **kw)


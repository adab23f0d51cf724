"""Per-edge route transfer: export at the sender, import at the receiver.

Shared by the simulator, the inference rules and the taint oracle so all three
agree on policy semantics.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..policy import ACCEPTED, apply_binding
from ..routes import RouteAttrs

DEFAULT_LOCAL_PREF = 100


@dataclass(frozen=True)
class Transfer:
    """Outcome of pushing one route across one edge."""
    pre_import: RouteAttrs | None
    post_import: RouteAttrs | None
    export_exercised: tuple = ()
    import_exercised: tuple = ()

    @property
    def delivered(self):
        return self.post_import is not None


def suppressed_by_summary(network, host, prefix, active_aggregates):
    """True when an active summary-only aggregate on ``host`` covers ``prefix``."""
    cfg = network.config(host)
    if cfg.bgp is None:
        return False
    for agg in cfg.bgp.aggregates:
        if (agg.summary_only and agg.prefix in active_aggregates and prefix != agg.prefix
                and prefix.subnet_of(agg.prefix)):
            return True
    return False


def exportable(edge, entry):
    """Session-level eligibility, independent of policy: no iBGP re-advertisement."""
    return not (edge.kind == "ibgp" and entry.kind == "ibgp")


def export_route(network, edge, attrs):
    """Run the sender side: export policy, next-hop-self, eBGP prepend."""
    cfg = network.config(edge.send_host)
    res = apply_binding(edge.export_policy, attrs, cfg)
    if res.outcome != ACCEPTED:
        return None, res.exercised
    out = res.route_out.evolve(nexthop=edge.send_ip, origin_protocol="bgp")
    if edge.kind in ("ebgp", "external-out"):
        out = out.evolve(as_path=(edge.send_as,) + out.as_path, local_pref=DEFAULT_LOCAL_PREF)
    return out, res.exercised


def import_route(network, edge, msg):
    """Run the receiver side: eBGP loop check, then the import policy."""
    if edge.kind in ("ebgp", "external-in") and edge.recv_as in msg.as_path:
        return None, ()
    if edge.kind == "external-out":
        return msg, ()  # the far side is not modeled
    cfg = network.config(edge.recv_host)
    res = apply_binding(edge.import_policy, msg, cfg)
    if res.outcome != ACCEPTED:
        return None, res.exercised
    return res.route_out, res.exercised


def transfer(network, edge, attrs):
    """Push ``attrs`` (a best route at the sender) across a session edge."""
    pre, ex_out = export_route(network, edge, attrs)
    if pre is None:
        return Transfer(None, None, ex_out, ())
    post, ex_in = import_route(network, edge, pre)
    return Transfer(pre, post, ex_out, ex_in)


def receive_external(network, edge, announced):
    """Import an environment-supplied route arriving on an external-in edge."""
    post, ex_in = import_route(network, edge, announced)
    return Transfer(announced, post, (), ex_in)


def redistribute(network, edge, prefix, protocol):
    """Inject a connected/static prefix into BGP through the redistribute policy."""
    cfg = network.config(edge.send_host)
    seed = RouteAttrs(prefix=prefix, origin_protocol=protocol)
    res = apply_binding(edge.export_policy, seed, cfg)
    if res.outcome != ACCEPTED:
        return Transfer(seed, None, res.exercised, ())
    return Transfer(seed, res.route_out.evolve(nexthop=None), res.exercised, ())


def rank_key(entry):
    """Best-path order: local_pref desc, AS-path length, eBGP over iBGP, neighbor IP."""
    a = entry.attrs
    nip = -1 if entry.neighbor_ip is None else int(entry.neighbor_ip)
    return (-a.local_pref, len(a.as_path), 1 if entry.kind == "ibgp" else 0, nip, entry.source)


def multipath_key(entry):
    return rank_key(entry)[:3]


def is_learned(entry):
    return entry.kind in ("ebgp", "ibgp", "external")


def active_aggregates(state, host):
    return {e.prefix for e in state.bgp_entries(host) if e.best and e.source == "aggregate"}


def export_candidates(network, state, edge, prefix=None):
    """BEST entries at the sender that the session would consider exporting."""
    host = edge.send_host
    active = active_aggregates(state, host)
    return [e for e in state.bgp_entries(host, prefix)
            if e.best and exportable(edge, e)
            and not suppressed_by_summary(network, host, e.prefix, active)]


@dataclass(frozen=True)
class MessageOrigin:
    """How a route crossing a session edge came to be sent."""
    sent: Transfer  # transfer of the route the sender actually advertises
    origins: tuple  # ((BgpRibEntry, export exercised), ...) yielding the same pre-import route


def message_origins(network, state, edge, prefix):
    """Reconstruct the advertisement of ``prefix`` over a session edge.

    The sender advertises its top-ranked BEST route; any other BEST route
    whose export produces an identical message is an equally valid origin.
    Returns None when nothing is exported.
    """
    cands = export_candidates(network, state, edge, prefix)
    if not cands:
        return None
    primary = min(cands, key=rank_key)
    sent = transfer(network, edge, primary.attrs)
    if sent.pre_import is None:
        return MessageOrigin(sent, ())
    origins = []
    for o in sorted(cands, key=rank_key):
        pre, ex = export_route(network, edge, o.attrs)
        if pre == sent.pre_import:
            origins.append((o, ex))
    return MessageOrigin(sent, tuple(origins))

"""Backward inference rules.

Each rule takes a materialized fact and returns the (parent, child) edges
that explain it, creating new facts as needed. Rules only read the stable
state, so they can run in any order and on any worker.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import InferenceError, NotFound, SimulationMismatch
from ..sim.engine import (
    aggregate_contributors, network_origins, redistribution_origins, session_paths,
)
from ..sim.propagation import message_origins, receive_external, redistribute
from ..state import MAX_RESOLUTION_DEPTH
from .facts import (
    ACL, EDGE, MAIN, MSG, PATH, POST_IMPORT, PRE_IMPORT, PROTO, acl_fact, config_fact,
    disjunctive, edge_fact, main_fact, message_fact, path_fact, proto_fact,
)


@dataclass(frozen=True)
class Context:
    network: object
    state: object


@dataclass(frozen=True)
class InferenceRule:
    name: str
    applies: Callable
    body: Callable

    def __call__(self, fact, ctx):
        try:
            return list(self.body(fact, ctx))
        except SimulationMismatch as exc:
            raise SimulationMismatch(fact, self.name, exc.cause) from exc
        except InferenceError:
            raise
        except NotFound as exc:
            raise InferenceError(fact, self.name, exc) from exc


def _fan_in(parents, child, site):
    """Attach ``parents`` to ``child``; alternatives go through a disjunctive node."""
    if len(parents) == 1:
        return [(parents[0], child)]
    d = disjunctive(child, site)
    return [(p, d) for p in parents] + [(d, child)]


# ---------------------------------------------------------------- main RIB

def _is_main(f):
    return f.kind == MAIN


def main_from_protocol(f, ctx):
    st, m = ctx.state, f.payload
    if m.protocol in ("connected", "static"):
        tail = (lambda r: r.interface == m.out_interface) if m.protocol == "connected" \
            else (lambda r: r.nexthop == m.nexthop)
        found = [r for r in st.local_entries(m.host, m.protocol, m.prefix) if tail(r)]
        if not found:
            raise NotFound(f"no {m.protocol} protocol entry behind {m.key}")
    elif m.protocol == "aggregate":
        found = [r for r in st.lookup_bgp(m.host, m.prefix, best=True) if r.source == "aggregate"]
        if not found:
            raise NotFound(f"no active aggregate behind {m.key}")
    else:
        found = st.lookup_bgp(m.host, m.prefix, m.nexthop, best=True)
    return [(proto_fact(r), f) for r in found]


def _has_nexthop(f):
    return f.kind == MAIN and f.payload.nexthop is not None


def _resolution_depth(st, m, depth=0):
    if depth > MAX_RESOLUTION_DEPTH:
        raise InferenceError(m.key, "main_nexthop_resolution",
                             f"next-hop resolution deeper than {MAX_RESOLUTION_DEPTH}")
    for g in st.resolve_nexthop(m.host, m.nexthop, exclude=m.prefix):
        if g.nexthop is not None:
            _resolution_depth(st, g, depth + 1)


def main_nexthop_resolution(f, ctx):
    st, m = ctx.state, f.payload
    resolved = st.resolve_nexthop(m.host, m.nexthop, exclude=m.prefix)
    if not resolved:
        raise NotFound(f"next hop {m.nexthop} of {m.key} does not resolve")
    _resolution_depth(st, m)
    return _fan_in([main_fact(g) for g in resolved], f, "resolve")


# ---------------------------------------------------------------- protocol RIBs

def _is_local_proto(f):
    return f.kind == PROTO and f.key[1] in ("connected", "static")


def proto_from_config(f, ctx):
    return [(config_fact(f.payload.element), f)]


def _is_received(f):
    return f.kind == PROTO and f.key[1] == "bgp" and f.payload.kind not in ("local",)


def proto_from_message(f, ctx):
    r = f.payload
    return [(message_fact(r.source, r.prefix, POST_IMPORT, r.attrs), f)]


def _is_network(f):
    return f.kind == PROTO and f.key[1] == "bgp" and f.payload.source == "network"


def bgp_from_network_statement(f, ctx):
    r = f.payload
    origins = network_origins(ctx.state, r.host, r.prefix)
    if not origins:
        raise NotFound(f"network statement {r.prefix} on {r.host} has no backing route")
    return [(config_fact(r.element), f)] + _fan_in([main_fact(m) for m in origins], f, "network")


def _is_aggregate(f):
    return f.kind == PROTO and f.key[1] == "bgp" and f.payload.source == "aggregate"


def aggregate(f, ctx):
    r = f.payload
    contributors = aggregate_contributors(ctx.state, r.host, r.prefix)
    if not contributors:
        raise NotFound(f"aggregate {r.prefix} on {r.host} has no contributor")
    d = disjunctive(f, "aggregate")
    return ([(config_fact(r.element), f), (d, f)]
            + [(proto_fact(c), d) for c in contributors])


# ---------------------------------------------------------------- messages

def _is_post_import(f):
    return f.kind == MSG and f.key[2] == POST_IMPORT


def _is_pre_import(f):
    return f.kind == MSG and f.key[2] == PRE_IMPORT


def _external_announcement(ctx, edge, payload):
    for attrs in ctx.state.announced(edge.recv_host, edge.send_ip):
        if attrs.prefix == payload.prefix:
            tr = receive_external(ctx.network, edge, attrs)
            if tr.post_import == payload:
                return tr
    raise SimulationMismatch(None, "post_import_message",
                             f"no announcement on {edge.id} reproduces {payload}")


def _sent(ctx, edge, prefix):
    """Transfer of ``prefix`` over ``edge`` plus the origin entries and export clauses."""
    if edge.kind == "redistribution":
        tr = redistribute(ctx.network, edge, prefix, edge.protocol)
        origins = redistribution_origins(ctx.state, edge, prefix)
        if not origins:
            raise NotFound(f"no active {edge.protocol} route {prefix} on {edge.send_host}")
        return tr, origins, list(tr.export_exercised)
    mo = message_origins(ctx.network, ctx.state, edge, prefix)
    if mo is None or mo.sent.pre_import is None:
        raise SimulationMismatch(None, "pre_import_message",
                                 f"{edge.send_host} sends no {prefix} over {edge.id}")
    exported = []
    for _o, ex in mo.origins:
        exported += [c for c in ex if c not in exported]
    return mo.sent, [o for o, _ in mo.origins], exported


def _pre_parents(pre, e, origins, exported):
    out = [(e, pre)] + [(config_fact(c), pre) for c in exported]
    return out + _fan_in([proto_fact(o) for o in origins], pre, "origin")


def pre_import_message(f, ctx):
    """m' <- origin route(s), edge, export clauses."""
    edge = ctx.state.edge(f.key[0])
    e = edge_fact(edge)
    if edge.kind == "external-in":
        return [(e, f)]
    tr, origins, exported = _sent(ctx, edge, f.payload.prefix)
    if tr.pre_import != f.payload:
        raise SimulationMismatch(None, "pre_import_message",
                                 f"re-simulated {tr.pre_import} != recorded {f.payload}")
    return _pre_parents(f, e, origins, exported)


def post_import_message(f, ctx):
    """m <- m', edge, import clauses; m' <- origin route(s), edge, export clauses."""
    edge = ctx.state.edge(f.key[0])
    e = edge_fact(edge)
    prefix = f.payload.prefix
    if edge.kind == "external-in":
        tr = _external_announcement(ctx, edge, f.payload)
        pre = message_fact(edge.id, prefix, PRE_IMPORT, tr.pre_import)
        return [(pre, f), (e, f), (e, pre)] + [(config_fact(c), f) for c in tr.import_exercised]
    tr, origins, exported = _sent(ctx, edge, prefix)
    if tr.post_import != f.payload:
        raise SimulationMismatch(None, "post_import_message",
                                 f"re-simulated {tr.post_import} != recorded {f.payload}"
                                 f" on {edge.id}")
    pre = message_fact(edge.id, prefix, PRE_IMPORT, tr.pre_import)
    out = [(pre, f), (e, f)] + [(config_fact(c), f) for c in tr.import_exercised]
    return out + _pre_parents(pre, e, origins, exported)


# ---------------------------------------------------------------- edges, paths, ACLs

def _is_edge(f):
    return f.kind == EDGE


def edge_from_configs(f, ctx):
    return [(config_fact(c), f) for c in f.payload.elements]


def _is_session_edge(f):
    return f.kind == EDGE and f.payload.kind != "redistribution"


def edge_from_paths(f, ctx):
    fwd, bwd = session_paths(ctx.state, f.payload)
    out = []
    for site, paths in (("paths-fwd", fwd), ("paths-bwd", bwd)):
        if site == "paths-bwd" and f.payload.is_external:
            continue
        if not paths:
            raise NotFound(f"session {f.payload.id} has no {site[6:]} path")
        out += _fan_in([path_fact(p) for p in paths], f, site)
    return out


def _is_path(f):
    return f.kind == PATH


def path_expansion(f, ctx):
    st = ctx.state
    out = [(main_fact(st.main_entry(k)), f) for k in dict.fromkeys(f.payload.main_entries)]
    out += [(acl_fact(st.acl_entry(k)), f) for k in dict.fromkeys(f.payload.acl_entries)]
    return out


def _is_acl(f):
    return f.kind == ACL


def acl_from_config(f, ctx):
    return [(config_fact(c), f) for c in f.payload.elements]


DEFAULT_RULES = (
    InferenceRule("main_from_protocol", _is_main, main_from_protocol),
    InferenceRule("main_nexthop_resolution", _has_nexthop, main_nexthop_resolution),
    InferenceRule("proto_from_config", _is_local_proto, proto_from_config),
    InferenceRule("proto_from_message", _is_received, proto_from_message),
    InferenceRule("bgp_from_network_statement", _is_network, bgp_from_network_statement),
    InferenceRule("aggregate", _is_aggregate, aggregate),
    InferenceRule("post_import_message", _is_post_import, post_import_message),
    InferenceRule("pre_import_message", _is_pre_import, pre_import_message),
    InferenceRule("edge_from_configs", _is_edge, edge_from_configs),
    InferenceRule("edge_from_paths", _is_session_edge, edge_from_paths),
    InferenceRule("path_expansion", _is_path, path_expansion),
    InferenceRule("acl_from_config", _is_acl, acl_from_config),
)

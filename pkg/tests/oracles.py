"""Independent reference implementations used to check the production code.

* ``taint_covered`` reads the forward taint recorded by a ``taint=True``
  simulation: every fact carries the elements it was computed from.
* ``enumerate_labels`` decides strong/weak by brute force over every truth
  assignment of the config variables, with numpy doing the bookkeeping.
* ``count_lines`` rescans a config file with a regex instead of the parser.
"""
from __future__ import annotations

import os
import random
import re
from dataclasses import dataclass

import numpy as np

from netcov.config import ElementId, load_network
from netcov.harness import load_suite
from netcov.ifg import IFG
from netcov.ifg.facts import CONFIG, DISJ, MAIN, MSG, PATH, PROTO, Fact
from netcov.sim import load_environment, path_taint, simulate
from netcov.sim.propagation import message_origins

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# fixtures with a converging control plane; suite.json in each
CONVERGING = (
    "two_router", "chain3", "policy_attrs", "ecmp_diamond", "aggregation", "redistribution",
    "ibgp_multihop", "static_ecmp", "acl", "peer_group", "external", "fattree_k4",
)


@dataclass
class Loaded:
    name: str
    path: str
    network: object
    state: object
    suite: list


def fixture_inputs(name):
    d = os.path.join(FIXTURES, name)
    configs = os.path.join(d, "configs") if os.path.isdir(os.path.join(d, "configs")) else d
    env = os.path.join(d, "environment.json")
    suite = os.path.join(d, "suite.json")
    return (configs, os.path.join(d, "topology.json"), env if os.path.exists(env) else None,
            suite if os.path.exists(suite) else None)


def load_fixture(name, taint=False):
    configs, topo, env, suite = fixture_inputs(name)
    network = load_network(configs, topo)
    state = simulate(network, load_environment(env) if env else None, taint=taint)
    tests = load_suite(suite, network, state) if suite else []
    return Loaded(name, os.path.join(FIXTURES, name), network, state, tests)


# ---------------------------------------------------------------- taint oracle

def _message_taint(fact, state, network):
    edge_id, prefix, _stage = fact.key
    edge = state.edge(edge_id)
    mo = message_origins(network, state, edge, fact.payload.prefix)
    out = set(state.taint["edge"][edge_id])
    for origin, exported in mo.origins:
        out |= state.taint["bgp"][origin.key]
        out.update(exported)
    return out


def seed_taint(fact, state, network):
    """Elements the simulator says ``fact`` was computed from."""
    if fact.kind == MAIN:
        return set(state.taint["main"][fact.key])
    if fact.kind == PATH:
        return path_taint(state, fact.payload)
    if fact.kind == PROTO:
        return set(state.taint["bgp"][fact.key])
    if fact.kind == MSG:
        return _message_taint(fact, state, network)
    raise ValueError(f"no taint for seed kind {fact.kind}")


def taint_covered(seeds, direct, state, network):
    out = set(direct)
    for s in seeds:
        out |= seed_taint(s, state, network)
    return out


# ---------------------------------------------------------------- truth tables

def enumerate_labels(ifg):
    """Strong/weak by exhaustive enumeration; no pruning, no BDD."""
    elements = sorted(ifg.nodes[n].payload for n in ifg.config_nodes())
    n = len(elements)
    if n > 20:
        raise ValueError("too many variables to enumerate")
    rows = np.arange(1 << n, dtype=np.uint32)
    value = {}
    for i, e in enumerate(elements):
        value[(CONFIG, tuple(e))] = ((rows >> i) & 1).astype(bool)
    ones = np.ones(1 << n, dtype=bool)
    for nid in ifg.topological_order():
        if nid[0] == CONFIG:
            continue
        ps = [value[p] for p in ifg.parents(nid)]
        if nid[0] == DISJ:
            value[nid] = np.logical_or.reduce(ps) if ps else ~ones
        else:
            value[nid] = np.logical_and.reduce(ps) if ps else ones
    children = ifg.children_map()
    labels = {}
    for i, e in enumerate(elements):
        off = ((rows >> i) & 1) == 0
        reach, stack = set(), [(CONFIG, tuple(e))]
        while stack:
            for c in children[stack.pop()]:
                if c not in reach:
                    reach.add(c)
                    stack.append(c)
        strong = any(not value[s][off].any() for s in reach & ifg.seeds)
        labels[e] = "strong" if strong else "weak"
    return labels


def random_ifg(rng, n_vars=None, n_inner=None):
    """Random DAG mixing AND nodes (main) and OR nodes (disj) over config leaves."""
    n_vars = n_vars or rng.randint(2, 20)
    n_inner = n_inner or rng.randint(3, 25)
    g = IFG()
    pool = []
    for i in range(n_vars):
        eid = ElementId("h", "Interface", f"x{i:02d}")
        f = Fact(CONFIG, tuple(eid), eid)
        g.nodes[f.id] = f
        pool.append(f)
    inner = []
    for j in range(n_inner):
        kind = DISJ if rng.random() < 0.4 else MAIN
        f = Fact(kind, (f"n{j}",))
        k = rng.randint(2 if kind == DISJ else 1, min(4, len(pool)))
        for p in rng.sample(pool, k):
            g.add(p, f)
        pool.append(f)
        inner.append(f)
    fed = {p for p, _ in g.edges}
    sinks = [f.id for f in inner if f.id not in fed and f.kind != DISJ]
    seeds = sinks or [inner[-1].id]
    if inner[-1].kind == DISJ and not sinks:
        top = Fact(MAIN, ("top",))
        g.add(inner[-1], top)
        seeds = [top.id]
    return g.restrict(seeds)


def random_ifgs(count, seed=0):
    rng = random.Random(seed)
    return [random_ifg(rng) for _ in range(count)]


# ---------------------------------------------------------------- line scanner

_STRIP = re.compile(r"#.*$")


def count_lines(path):
    """Lines that carry at least one token, excluding the ``device`` line."""
    n = 0
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            text = _STRIP.sub("", raw).strip()
            if text and not text.startswith("device "):
                n += 1
    return n


# ---------------------------------------------------------------- hand-built uncertainty graph

def uncertainty_ifg():
    """F1 (tested) <- {D, F7}; D is disjunctive over F2, F3; F2 <- {F5, F6}; F3 <- F6."""
    el = {n: ElementId("R", "Interface", n) for n in ("F5", "F6", "F7")}
    cfg = {n: Fact(CONFIG, tuple(e), e) for n, e in el.items()}
    f1 = Fact(MAIN, ("F1",))
    f2 = Fact(PROTO, ("F2",))
    f3 = Fact(PROTO, ("F3",))
    d = Fact(DISJ, ("main", ("F1",), "aggregate"))
    g = IFG(seeds=[f1.id])
    for p, c in ((cfg["F5"], f2), (cfg["F6"], f2), (cfg["F6"], f3), (f2, d), (f3, d), (d, f1),
                 (cfg["F7"], f1)):
        g.add(p, c)
    return g, el, {"F1": f1.id, "F2": f2.id, "F3": f3.id, "D": d.id}

"""Lazy IFG materialization."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from graphlib import CycleError, TopologicalSorter

from ..errors import CycleDetected, ShapeViolation
from .facts import ALLOWED_PARENTS, CONFIG, jsonable
from .rules import DEFAULT_RULES, Context


class IFG:
    """Materialized information-flow graph.

    ``nodes`` maps a fact id to its Fact; ``edges`` holds (parent id, child id)
    pairs. Every node is an ancestor of some seed.
    """

    def __init__(self, nodes=None, edges=None, seeds=()):
        self.nodes = dict(nodes or {})
        self.edges = set(edges or ())
        self.seeds = frozenset(seeds)
        self._parents = None

    def add(self, parent, child):
        self._parents = None
        self.nodes.setdefault(child.id, child)
        new = parent.id not in self.nodes
        self.nodes.setdefault(parent.id, parent)
        self.edges.add((parent.id, child.id))
        return new

    def parents(self, nid):
        if self._parents is None:
            self._parents = {n: [] for n in self.nodes}
            for p, c in sorted(self.edges):
                self._parents[c].append(p)
        return self._parents.get(nid, [])

    def children_map(self):
        out = {n: [] for n in self.nodes}
        for p, c in sorted(self.edges):
            out[p].append(c)
        return out

    def restrict(self, seeds):
        """Sub-graph of the ancestors of ``seeds`` (ids), which must be nodes here."""
        keep, stack = set(seeds), list(seeds)
        while stack:
            for p in self.parents(stack.pop()):
                if p not in keep:
                    keep.add(p)
                    stack.append(p)
        return IFG({n: self.nodes[n] for n in keep},
                   {(p, c) for p, c in self.edges if c in keep}, seeds)

    def topological_order(self):
        """Node ids, parents before children. Raises CycleDetected."""
        ts = TopologicalSorter({n: self.parents(n) for n in sorted(self.nodes)})
        try:
            return list(ts.static_order())
        except CycleError as exc:
            raise CycleDetected(f"IFG contains a cycle: {exc.args[1]}") from None

    def check_shapes(self):
        for p, c in self.edges:
            if p[0] not in ALLOWED_PARENTS[c[0]]:
                raise ShapeViolation(f"{p[0]} fact cannot feed a {c[0]} fact: {p} -> {c}")

    def config_nodes(self):
        return sorted(n for n in self.nodes if n[0] == CONFIG)

    def covered_elements(self):
        return {self.nodes[n].payload for n in self.config_nodes()}

    def to_json(self):
        return {
            "nodes": [{"kind": k, "key": jsonable(key), "seed": (k, key) in self.seeds}
                      for k, key in sorted(self.nodes, key=_sort_id)],
            "edges": [[{"kind": p[0], "key": jsonable(p[1])}, {"kind": c[0], "key": jsonable(c[1])}]
                      for p, c in sorted(self.edges, key=lambda e: (_sort_id(e[0]), _sort_id(e[1])))],
        }

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def _sort_id(nid):
    return json.dumps(jsonable(nid), default=str)


def _expand(fact, rules, ctx):
    out = []
    for rule in rules:
        if rule.applies(fact):
            out.extend(rule(fact, ctx))
    return out


def build_ifg(seeds, state, network, rules=DEFAULT_RULES, workers=1):
    """Worklist fixpoint: expand every dirty fact with every applicable rule.

    New parents become dirty; the loop ends when a pass creates no new node.
    With ``workers > 1`` a pass is expanded concurrently and merged in a fixed
    order, so the result does not depend on scheduling.
    """
    ctx = Context(network, state)
    ifg = IFG(seeds=[s.id for s in seeds])
    for s in seeds:
        ifg.nodes.setdefault(s.id, s)
    dirty = sorted({s.id: s for s in seeds}.values(), key=lambda f: _sort_id(f.id))
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while dirty:
            if pool is None:
                results = [_expand(f, rules, ctx) for f in dirty]
            else:
                results = list(pool.map(lambda f: _expand(f, rules, ctx), dirty))
            fresh = {}
            for edges in results:
                for parent, child in edges:
                    if ifg.add(parent, child) or parent.id in fresh:
                        fresh[parent.id] = ifg.nodes[parent.id]
            dirty = sorted(fresh.values(), key=lambda f: _sort_id(f.id))
    finally:
        if pool is not None:
            pool.shutdown()
    ifg.check_shapes()
    ifg.topological_order()
    return ifg


def covered_elements(ifg, direct=()):
    """Config elements feeding any seed, plus directly tested elements."""
    return ifg.covered_elements() | set(direct)

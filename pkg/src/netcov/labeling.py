"""Strong/weak classification of covered elements."""
from __future__ import annotations

from dataclasses import dataclass, field

from .bdd import TRUE, Bdd
from .ifg.facts import CONFIG, DISJ

STRONG = "strong"
WEAK = "weak"


@dataclass
class PredicateMap:
    bdd: Bdd
    gamma: dict  # node id -> BDD node
    var_of: dict  # element id -> variable index (unpruned elements only)
    pruned: frozenset = field(default_factory=frozenset)  # element ids fixed to TRUE


def disjunction_free_ancestors(ifg):
    """Node ids that reach a seed along a path avoiding disjunctive nodes."""
    seen = set(ifg.seeds)
    stack = list(ifg.seeds)
    while stack:
        n = stack.pop()
        for p in ifg.parents(n):
            if p[0] != DISJ and p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def build_predicates(ifg, prune=True, bdd=None, order=None):
    """Assign every IFG node its predicate, parents before children.

    Variables follow the sorted element ids unless ``order`` (a sequence of
    element ids) says otherwise.
    """
    bdd = bdd or Bdd()
    pruned = set()
    if prune:
        pruned = {n for n in disjunction_free_ancestors(ifg) if n[0] == CONFIG}
    var_of = {}
    nodes = ifg.config_nodes()
    if order is not None:
        rank = {tuple(e): i for i, e in enumerate(order)}
        nodes = sorted(nodes, key=lambda n: rank[n[1]])
    for n in nodes:
        if n not in pruned:
            var_of[ifg.nodes[n].payload] = len(var_of)
    gamma = {}
    for n in ifg.topological_order():
        if n[0] == CONFIG:
            eid = ifg.nodes[n].payload
            gamma[n] = bdd.var(var_of[eid]) if eid in var_of else TRUE
            continue
        parents = [gamma[p] for p in ifg.parents(n)]
        if n[0] == DISJ:
            gamma[n] = bdd.disjoin(parents)
        else:
            gamma[n] = bdd.conjoin(parents)
    return PredicateMap(bdd, gamma, var_of, frozenset(ifg.nodes[n].payload for n in pruned))


def reachable_seeds(ifg, nid, children=None):
    children = children if children is not None else ifg.children_map()
    seen, stack = {nid}, [nid]
    while stack:
        for c in children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return sorted(seen & ifg.seeds)


def classify(eid, ifg, preds, children=None):
    """Strong iff dropping ``eid`` falsifies the predicate of at least one seed it feeds."""
    if eid in preds.pruned:
        return STRONG
    i = preds.var_of[eid]
    for s in reachable_seeds(ifg, (CONFIG, tuple(eid)), children):
        if preds.bdd.is_false(preds.bdd.cofactor(preds.gamma[s], i, 0)):
            return STRONG
    return WEAK


def label_elements(ifg, prune=True, direct=(), cap=None):
    """Labels for every covered element; directly tested elements are always strong."""
    preds = build_predicates(ifg, prune=prune, bdd=Bdd(cap))
    children = ifg.children_map()
    labels = {ifg.nodes[n].payload: classify(ifg.nodes[n].payload, ifg, preds, children)
              for n in ifg.config_nodes()}
    for eid in direct:
        labels[eid] = STRONG
    return labels

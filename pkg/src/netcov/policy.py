"""Route policy evaluation.

``evaluate_policy`` is the targeted-simulation primitive: it runs one route
through one policy and reports which clause and list elements the route
actually exercised.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .config.elements import LIST_TYPES, POLICY_CLAUSE, clause_name, element_id
from .config.model import ACCEPT, FALLTHROUGH, REJECT

ACCEPTED = "Accept"
REJECTED = "Reject"


@dataclass(frozen=True)
class PolicyResult:
    outcome: str
    route_out: Optional[object]  # RouteAttrs when accepted
    exercised: tuple  # ElementIds, clause before the lists it consulted

    @property
    def accepted(self):
        return self.outcome == ACCEPTED


def match_prefix_list(plist, prefix):
    for e in plist.entries:
        if not prefix.subnet_of(e.prefix):
            continue
        n = prefix.prefixlen
        if e.ge is None and e.le is None:
            ok = n == e.prefix.prefixlen
        else:
            lo = e.ge if e.ge is not None else e.prefix.prefixlen
            hi = e.le if e.le is not None else 32
            ok = lo <= n <= hi
        if ok:
            return True
    return False


def match_community(clist, communities):
    return any(c in communities for c in clist.communities)


@lru_cache(maxsize=1024)
def _compiled(pattern):
    return re.compile(pattern)


def match_as_path(alist, as_path):
    text = " ".join(str(a) for a in as_path)
    return any(_compiled(p).fullmatch(text) for p in alist.patterns)


def _match(cond, route, config):
    if cond.kind == "prefix-list":
        return match_prefix_list(config.prefix_list(cond.name), route.prefix)
    if cond.kind == "community-list":
        return match_community(config.community_list(cond.name), route.communities)
    return match_as_path(config.aspath_list(cond.name), route.as_path)


def _apply(action, route):
    if action.kind == "local-preference":
        return route.evolve(local_pref=action.value)
    values = frozenset(action.value)
    if action.additive:
        return route.evolve(communities=route.communities | values)
    return route.evolve(communities=values)


def evaluate_policy(policy, route, config):
    """Run ``route`` through ``policy`` defined in ``config``.

    Clauses are tried in sequence order; a clause matches when all its match
    conditions hold. A matching clause applies its actions, then accepts,
    rejects, or falls through to the next clause. A route that reaches the end
    of the policy is rejected. Only matching clauses, and the lists they
    consulted, are reported as exercised.
    """
    host = config.hostname
    exercised = []
    current = route
    for clause in policy.clauses:
        if not all(_match(m, current, config) for m in clause.matches):
            continue
        exercised.append(element_id(host, POLICY_CLAUSE, clause_name(policy.name, clause.seq)))
        for m in clause.matches:
            eid = element_id(host, LIST_TYPES[m.kind], m.name)
            if eid not in exercised:
                exercised.append(eid)
        if clause.outcome == REJECT:
            return PolicyResult(REJECTED, None, tuple(exercised))
        for action in clause.actions:
            current = _apply(action, current)
        if clause.outcome == ACCEPT:
            return PolicyResult(ACCEPTED, current, tuple(exercised))
        assert clause.outcome == FALLTHROUGH
    return PolicyResult(REJECTED, None, tuple(exercised))


def apply_binding(policy_name, route, config):
    """Evaluate an optional policy binding; an unbound policy accepts unchanged."""
    if policy_name is None:
        return PolicyResult(ACCEPTED, route, ())
    return evaluate_policy(config.policy(policy_name), route, config)

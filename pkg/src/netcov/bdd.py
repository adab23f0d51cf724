"""Reduced ordered binary decision diagrams over positive variables.

Nodes are integers into a hash-consed store, so two BDDs denote the same
function iff they are the same integer. Only the operations coverage labeling
needs are provided: variables, conjunction, disjunction and cofactoring.
"""
from __future__ import annotations

import os
import sys
from contextlib import contextmanager

from .errors import BddCapacityError

FALSE = 0
TRUE = 1
DEFAULT_CAP = 1 << 24
_TERMINAL_LEVEL = float("inf")


def default_cap():
    raw = os.environ.get("NETCOV_BDD_CAP")
    return int(raw) if raw else DEFAULT_CAP


@contextmanager
def _deep_recursion(depth):
    old = sys.getrecursionlimit()
    if depth > old:
        sys.setrecursionlimit(depth)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


class Bdd:
    def __init__(self, cap=None):
        self.cap = default_cap() if cap is None else cap
        # node -> (level, low, high); terminals sit below every variable
        self._nodes = [(_TERMINAL_LEVEL, None, None), (_TERMINAL_LEVEL, None, None)]
        self._unique = {}
        self._and_cache = {}
        self._or_cache = {}
        self._restrict_cache = {}
        self.num_vars = 0

    def __len__(self):
        return len(self._nodes)

    def _mk(self, level, low, high):
        if low == high:
            return low
        key = (level, low, high)
        node = self._unique.get(key)
        if node is None:
            if len(self._nodes) >= self.cap:
                raise BddCapacityError(f"BDD node store exceeded cap of {self.cap} nodes")
            node = len(self._nodes)
            self._nodes.append(key)
            self._unique[key] = node
        return node

    def node(self, n):
        return self._nodes[n]

    def var(self, i):
        self.num_vars = max(self.num_vars, i + 1)
        return self._mk(i, FALSE, TRUE)

    def and_(self, a, b):
        with _deep_recursion(3 * self.num_vars + 1000):
            return self._and(a, b)

    def or_(self, a, b):
        with _deep_recursion(3 * self.num_vars + 1000):
            return self._or(a, b)

    def _and(self, a, b):
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        if a > b:
            a, b = b, a
        hit = self._and_cache.get((a, b))
        if hit is not None:
            return hit
        la, a0, a1 = self._nodes[a]
        lb, b0, b1 = self._nodes[b]
        lvl = min(la, lb)
        a0, a1 = (a0, a1) if la == lvl else (a, a)
        b0, b1 = (b0, b1) if lb == lvl else (b, b)
        r = self._mk(lvl, self._and(a0, b0), self._and(a1, b1))
        self._and_cache[(a, b)] = r
        return r

    def _or(self, a, b):
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        if b == FALSE or a == b:
            return a
        if a > b:
            a, b = b, a
        hit = self._or_cache.get((a, b))
        if hit is not None:
            return hit
        la, a0, a1 = self._nodes[a]
        lb, b0, b1 = self._nodes[b]
        lvl = min(la, lb)
        a0, a1 = (a0, a1) if la == lvl else (a, a)
        b0, b1 = (b0, b1) if lb == lvl else (b, b)
        r = self._mk(lvl, self._or(a0, b0), self._or(a1, b1))
        self._or_cache[(a, b)] = r
        return r

    def conjoin(self, nodes):
        out = TRUE
        for n in nodes:
            out = self.and_(out, n)
        return out

    def disjoin(self, nodes):
        out = FALSE
        for n in nodes:
            out = self.or_(out, n)
        return out

    def cofactor(self, a, i, value):
        """Substitute the constant ``value`` for variable ``i`` in ``a``."""
        with _deep_recursion(3 * self.num_vars + 1000):
            return self._restrict(a, i, bool(value))

    def _restrict(self, a, i, value):
        lvl, low, high = self._nodes[a]
        if lvl > i:
            return a
        if lvl == i:
            return high if value else low
        key = (a, i, value)
        hit = self._restrict_cache.get(key)
        if hit is not None:
            return hit
        r = self._mk(lvl, self._restrict(low, i, value), self._restrict(high, i, value))
        self._restrict_cache[key] = r
        return r

    @staticmethod
    def is_false(a):
        return a == FALSE

    @staticmethod
    def is_true(a):
        return a == TRUE

    def evaluate(self, a, assignment):
        """Value of ``a`` under ``assignment`` (a mapping or sequence indexed by variable)."""
        while a > TRUE:
            lvl, low, high = self._nodes[a]
            a = high if assignment[lvl] else low
        return a == TRUE

    def support(self, a):
        seen, out, stack = set(), set(), [a]
        while stack:
            n = stack.pop()
            if n <= TRUE or n in seen:
                continue
            seen.add(n)
            lvl, low, high = self._nodes[n]
            out.add(lvl)
            stack += [low, high]
        return out

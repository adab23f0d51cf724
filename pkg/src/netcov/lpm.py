"""Binary trie for longest-prefix-match lookups over IPv4 prefixes."""
from __future__ import annotations

import ipaddress


class _Node:
    __slots__ = ("children", "prefix", "values")

    def __init__(self):
        self.children = [None, None]
        self.prefix = None
        self.values = None


class PrefixTrie:
    def __init__(self, items=()):
        self._root = _Node()
        self._len = 0
        for prefix, value in items:
            self.insert(prefix, value)

    def __len__(self):
        return self._len

    def insert(self, prefix, value):
        prefix = ipaddress.IPv4Network(prefix)
        bits = int(prefix.network_address)
        node = self._root
        for i in range(prefix.prefixlen):
            b = (bits >> (31 - i)) & 1
            if node.children[b] is None:
                node.children[b] = _Node()
            node = node.children[b]
        if node.values is None:
            node.prefix = prefix
            node.values = []
        node.values.append(value)
        self._len += 1

    def exact(self, prefix):
        prefix = ipaddress.IPv4Network(prefix)
        bits = int(prefix.network_address)
        node = self._root
        for i in range(prefix.prefixlen):
            node = node.children[(bits >> (31 - i)) & 1]
            if node is None:
                return []
        return list(node.values or [])

    def matches(self, ip):
        """All (prefix, values) containing ``ip``, longest first."""
        bits = int(ipaddress.IPv4Address(ip))
        node = self._root
        found = []
        i = 0
        while node is not None:
            if node.values:
                found.append((node.prefix, list(node.values)))
            if i == 32:
                break
            node = node.children[(bits >> (31 - i)) & 1]
            i += 1
        found.reverse()
        return found

    def longest(self, ip, exclude=None):
        """Values stored at the longest prefix containing ``ip`` (skipping ``exclude``)."""
        for prefix, values in self.matches(ip):
            if exclude is not None and prefix == exclude:
                continue
            return prefix, values
        return None, []

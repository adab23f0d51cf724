"""Parser for the line-oriented configuration DSL.

Grammar (one device per file)::

    device <hostname>;
    interface <name> { address <a.b.c.d>/<len>; [acl-in <acl>;] [acl-out <acl>;] }
    static-route <prefix> next-hop <ip>;
    bgp { local-as <n>; [multipath <k>;] [network <prefix>;]*
          [aggregate <prefix> [summary-only];]*
          [redistribute connected|static [policy <name>];]*
          [peer-group <g> { <peer-settings> }]*
          [neighbor <ip> { remote-as <n>; [peer-group <g>;]
                           [import-policy <p>;] [export-policy <p>;] }]* }
    policy <name> { clause <seq> { <match>* <set>* (accept;|reject;|fallthrough;) } }
    prefix-list <name> { <prefix> [ge <n>] [le <n>]; ... }
    community-list <name> { <x:y>; ... }
    as-path-list <name> { <regex>; ... }
    acl <name> { <seq> permit|deny <proto> <src> <dst> [dst-port <p>]; ... }

``#`` starts a comment. Tokens may be double-quoted.
"""
from __future__ import annotations

import ipaddress
import os
import re
from dataclasses import dataclass

from ..errors import ConfigSyntaxError, DuplicateDefinition, UnresolvedReference
from .model import (
    ACCEPT, FALLTHROUGH, REJECT, AclDef, AclRule, Action, AggregateDef, AsPathList,
    BgpProcess, Clause, CommunityList, DeviceConfig, InterfaceDef, MatchCond,
    NeighborDef, NetworkDef, PeerGroupDef, PrefixList, PrefixListEntry,
    RedistributionDef, RoutePolicy, StaticRoute,
)

_COMMUNITY_RE = re.compile(r"^\d+:\d+$")
_PUNCT = "{};"


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    quoted: bool = False


def tokenize(text, filename="<string>"):
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        i, n = 0, len(raw)
        while i < n:
            ch = raw[i]
            if ch.isspace():
                i += 1
            elif ch == "#":
                break
            elif ch in _PUNCT:
                tokens.append(Token(ch, lineno))
                i += 1
            elif ch == '"':
                j = raw.find('"', i + 1)
                if j < 0:
                    raise ConfigSyntaxError("unterminated string", lineno, filename)
                tokens.append(Token(raw[i + 1:j], lineno, quoted=True))
                i = j + 1
            else:
                j = i
                while j < n and not raw[j].isspace() and raw[j] not in _PUNCT and raw[j] not in '#"':
                    j += 1
                tokens.append(Token(raw[i:j], lineno))
                i = j
    return tokens


class _Parser:
    def __init__(self, text, filename):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.pos = 0
        self.line_count = len(text.splitlines())
        self.refs = []  # (kind, name, line) checked after parsing

    # token helpers
    def error(self, msg, line=None):
        if line is None:
            tok = self.peek()
            line = tok.line if tok else self.line_count
        return ConfigSyntaxError(msg, line, self.filename)

    def peek(self, offset=0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of file")
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok.quoted or tok.text != text:
            raise self.error(f"expected {text!r}, got {tok.text!r}", tok.line)
        return tok

    def word(self, what="name"):
        tok = self.next()
        if not tok.quoted and tok.text in _PUNCT:
            raise self.error(f"expected {what}, got {tok.text!r}", tok.line)
        return tok

    def at(self, text):
        tok = self.peek()
        return tok is not None and not tok.quoted and tok.text == text

    def integer(self, what="integer", lo=0, hi=None):
        tok = self.word(what)
        try:
            value = int(tok.text)
        except ValueError:
            raise self.error(f"expected {what}, got {tok.text!r}", tok.line) from None
        if value < lo or (hi is not None and value > hi):
            raise self.error(f"{what} {value} out of range", tok.line)
        return value

    def prefix(self):
        tok = self.word("prefix")
        try:
            return ipaddress.IPv4Network(tok.text, strict=True)
        except ValueError as exc:
            raise self.error(f"invalid prefix {tok.text!r}: {exc}", tok.line) from None

    def ip(self):
        tok = self.word("IPv4 address")
        try:
            return ipaddress.IPv4Address(tok.text)
        except ValueError:
            raise self.error(f"invalid IPv4 address {tok.text!r}", tok.line) from None

    def end(self):
        return self.expect(";").line

    def ref(self, kind, name_tok):
        self.refs.append((kind, name_tok.text, name_tok.line))
        return name_tok.text

    # grammar
    def parse(self):
        hostname = None
        device_line = 0
        interfaces, policies, plists, clists, alists, statics, acls = [], [], [], [], [], [], []
        bgp = None
        seen = {}

        def unique(kind, name, line):
            key = (kind, name)
            if key in seen:
                raise DuplicateDefinition(f"{kind} {name}", line, self.filename)
            seen[key] = line

        while self.peek() is not None:
            kw = self.word("statement")
            k = kw.text
            if k == "device":
                if hostname is not None:
                    raise DuplicateDefinition("device", kw.line, self.filename)
                hostname = self.word("hostname").text
                device_line = kw.line
                self.end()
            elif k == "interface":
                item = self.interface(kw)
                unique("interface", item.name, kw.line)
                interfaces.append(item)
            elif k == "static-route":
                pfx = self.prefix()
                self.expect("next-hop")
                nh = self.ip()
                last = self.end()
                item = StaticRoute(pfx, nh, span=(kw.line, last))
                unique("static-route", item.name, kw.line)
                statics.append(item)
            elif k == "bgp":
                if bgp is not None:
                    raise DuplicateDefinition("bgp", kw.line, self.filename)
                bgp = self.bgp(kw)
            elif k == "policy":
                item = self.policy(kw)
                unique("policy", item.name, kw.line)
                policies.append(item)
            elif k == "prefix-list":
                item = self.prefix_list(kw)
                unique("prefix-list", item.name, kw.line)
                plists.append(item)
            elif k == "community-list":
                item = self.community_list(kw)
                unique("community-list", item.name, kw.line)
                clists.append(item)
            elif k == "as-path-list":
                item = self.aspath_list(kw)
                unique("as-path-list", item.name, kw.line)
                alists.append(item)
            elif k == "acl":
                item = self.acl(kw)
                unique("acl", item.name, kw.line)
                acls.append(item)
            else:
                raise self.error(f"unknown statement {k!r}", kw.line)

        if hostname is None:
            hostname = os.path.splitext(os.path.basename(self.filename))[0]
        config = DeviceConfig(
            hostname=hostname,
            interfaces=tuple(interfaces),
            bgp=bgp,
            policies=tuple(policies),
            prefix_lists=tuple(plists),
            community_lists=tuple(clists),
            aspath_lists=tuple(alists),
            static_routes=tuple(statics),
            acls=tuple(acls),
            source_file=self.filename,
            line_count=self.line_count,
            device_line=device_line,
            token_lines=frozenset(t.line for t in self.tokens),
        )
        self.resolve(config)
        self.check_spans(config)
        return config

    def interface(self, kw):
        name = self.word("interface name").text
        self.expect("{")
        address = acl_in = acl_out = None
        while not self.at("}"):
            tok = self.word("interface setting")
            if tok.text == "address":
                atok = self.word("address")
                try:
                    address = ipaddress.IPv4Interface(atok.text)
                except ValueError:
                    raise self.error(f"invalid interface address {atok.text!r}", atok.line) from None
                if "/" not in atok.text:
                    raise self.error("interface address needs a prefix length", atok.line)
            elif tok.text == "acl-in":
                acl_in = self.ref("acl", self.word("acl name"))
            elif tok.text == "acl-out":
                acl_out = self.ref("acl", self.word("acl name"))
            else:
                raise self.error(f"unknown interface setting {tok.text!r}", tok.line)
            self.end()
        last = self.expect("}").line
        return InterfaceDef(name, address, acl_in, acl_out, span=(kw.line, last))

    def peer_settings(self, allow_group):
        out = {}
        while not self.at("}"):
            tok = self.word("peer setting")
            key = tok.text
            if key in out:
                raise DuplicateDefinition(key, tok.line, self.filename)
            if key == "remote-as":
                out[key] = self.integer("AS number", lo=0, hi=2**32 - 1)
            elif key in ("import-policy", "export-policy"):
                out[key] = self.ref("policy", self.word("policy name"))
            elif key == "peer-group" and allow_group:
                out[key] = self.ref("peer-group", self.word("peer group"))
            else:
                raise self.error(f"unknown peer setting {key!r}", tok.line)
            self.end()
        return out

    def bgp(self, kw):
        self.expect("{")
        local_as = None
        multipath = 1
        networks, aggregates, redists, groups, neighbors = [], [], [], [], []
        seen = set()

        def unique(key, line):
            if key in seen:
                raise DuplicateDefinition(" ".join(str(k) for k in key), line, self.filename)
            seen.add(key)

        while not self.at("}"):
            tok = self.word("bgp setting")
            k = tok.text
            if k == "local-as":
                unique(("local-as",), tok.line)
                local_as = self.integer("AS number", lo=0, hi=2**32 - 1)
                self.end()
            elif k == "multipath":
                unique(("multipath",), tok.line)
                multipath = self.integer("multipath count", lo=1)
                self.end()
            elif k == "network":
                pfx = self.prefix()
                last = self.end()
                unique(("network", pfx), tok.line)
                networks.append(NetworkDef(pfx, span=(tok.line, last)))
            elif k == "aggregate":
                pfx = self.prefix()
                summary = False
                if self.at("summary-only"):
                    self.next()
                    summary = True
                last = self.end()
                unique(("aggregate", pfx), tok.line)
                aggregates.append(AggregateDef(pfx, summary, span=(tok.line, last)))
            elif k == "redistribute":
                proto = self.word("protocol")
                if proto.text not in ("connected", "static"):
                    raise self.error(f"cannot redistribute {proto.text!r}", proto.line)
                policy = None
                if self.at("policy"):
                    self.next()
                    policy = self.ref("policy", self.word("policy name"))
                last = self.end()
                unique(("redistribute", proto.text), tok.line)
                redists.append(RedistributionDef(proto.text, policy, span=(tok.line, last)))
            elif k == "peer-group":
                name = self.word("peer group").text
                self.expect("{")
                s = self.peer_settings(allow_group=False)
                last = self.expect("}").line
                unique(("peer-group", name), tok.line)
                groups.append(PeerGroupDef(
                    name, s.get("remote-as"), s.get("import-policy"), s.get("export-policy"),
                    span=(tok.line, last)))
            elif k == "neighbor":
                ip = self.ip()
                self.expect("{")
                s = self.peer_settings(allow_group=True)
                last = self.expect("}").line
                unique(("neighbor", ip), tok.line)
                neighbors.append(NeighborDef(
                    ip, s.get("remote-as"), s.get("peer-group"), s.get("import-policy"),
                    s.get("export-policy"), span=(tok.line, last)))
            else:
                raise self.error(f"unknown bgp setting {k!r}", tok.line)
        last = self.expect("}").line
        if local_as is None:
            raise self.error("bgp stanza requires local-as", kw.line)
        return BgpProcess(local_as, multipath, tuple(networks), tuple(aggregates), tuple(redists),
                          tuple(groups), tuple(neighbors), span=(kw.line, last))

    def policy(self, kw):
        name = self.word("policy name").text
        self.expect("{")
        clauses = []
        while not self.at("}"):
            ctok = self.expect("clause")
            seq = self.integer("clause sequence number")
            if clauses and seq <= clauses[-1].seq:
                if any(c.seq == seq for c in clauses):
                    raise DuplicateDefinition(f"clause {name} {seq}", ctok.line, self.filename)
                raise self.error("clause sequence numbers must increase", ctok.line)
            self.expect("{")
            matches, actions, outcome = [], [], None
            while not self.at("}"):
                tok = self.word("clause statement")
                if tok.text == "match":
                    kind = self.word("match kind")
                    if kind.text not in ("prefix-list", "community-list", "as-path-list"):
                        raise self.error(f"unknown match kind {kind.text!r}", kind.line)
                    matches.append(MatchCond(kind.text, self.ref(kind.text, self.word("list name"))))
                elif tok.text == "set":
                    what = self.word("set target")
                    if what.text == "local-preference":
                        actions.append(Action("local-preference", self.integer("local preference")))
                    elif what.text == "community":
                        values = []
                        additive = False
                        while not self.at(";"):
                            v = self.word("community")
                            if v.text == "additive":
                                additive = True
                            elif _COMMUNITY_RE.match(v.text):
                                values.append(v.text)
                            else:
                                raise self.error(f"invalid community {v.text!r}", v.line)
                        if not values:
                            raise self.error("set community needs a value", what.line)
                        actions.append(Action("community", tuple(values), additive))
                    else:
                        raise self.error(f"unknown set target {what.text!r}", what.line)
                elif tok.text in (ACCEPT, REJECT, FALLTHROUGH):
                    if outcome is not None:
                        raise self.error("clause has more than one terminal outcome", tok.line)
                    outcome = tok.text
                else:
                    raise self.error(f"unknown clause statement {tok.text!r}", tok.line)
                self.end()
            last = self.expect("}").line
            clauses.append(Clause(seq, tuple(matches), tuple(actions), outcome or FALLTHROUGH,
                                  span=(ctok.line, last)))
        last = self.expect("}").line
        return RoutePolicy(name, tuple(clauses), span=(kw.line, last))

    def prefix_list(self, kw):
        name = self.word("list name").text
        self.expect("{")
        entries = []
        while not self.at("}"):
            pfx = self.prefix()
            ge = le = None
            while not self.at(";"):
                tok = self.word("ge/le")
                if tok.text == "ge" and ge is None:
                    ge = self.integer("length", lo=0, hi=32)
                elif tok.text == "le" and le is None:
                    le = self.integer("length", lo=0, hi=32)
                else:
                    raise self.error(f"unexpected {tok.text!r} in prefix-list entry", tok.line)
            lo = pfx.prefixlen if ge is None else ge
            if lo < pfx.prefixlen or (le is not None and le < lo):
                raise self.error(f"need {pfx.prefixlen} <= ge <= le <= 32 for {pfx}")
            self.end()
            entries.append(PrefixListEntry(pfx, ge, le))
        last = self.expect("}").line
        return PrefixList(name, tuple(entries), span=(kw.line, last))

    def community_list(self, kw):
        name = self.word("list name").text
        self.expect("{")
        values = []
        while not self.at("}"):
            tok = self.word("community")
            if not _COMMUNITY_RE.match(tok.text):
                raise self.error(f"invalid community {tok.text!r}", tok.line)
            values.append(tok.text)
            self.end()
        last = self.expect("}").line
        return CommunityList(name, tuple(values), span=(kw.line, last))

    def aspath_list(self, kw):
        name = self.word("list name").text
        self.expect("{")
        patterns = []
        while not self.at("}"):
            words = []
            while not self.at(";"):
                words.append(self.word("regex").text)
            if not words:
                raise self.error("empty as-path pattern")
            pattern = " ".join(words)
            try:
                re.compile(pattern)
            except re.error as exc:
                raise self.error(f"invalid as-path regex {pattern!r}: {exc}") from None
            patterns.append(pattern)
            self.end()
        last = self.expect("}").line
        return AsPathList(name, tuple(patterns), span=(kw.line, last))

    def acl(self, kw):
        name = self.word("acl name").text
        self.expect("{")
        rules = []
        while not self.at("}"):
            first = self.peek()
            seq = self.integer("acl sequence number")
            if any(r.seq == seq for r in rules):
                raise DuplicateDefinition(f"acl {name} {seq}", first.line, self.filename)
            action = self.word("permit/deny")
            if action.text not in ("permit", "deny"):
                raise self.error(f"expected permit or deny, got {action.text!r}", action.line)
            proto = self.word("protocol")
            if proto.text not in ("ip", "tcp", "udp", "icmp"):
                raise self.error(f"unknown protocol {proto.text!r}", proto.line)
            src = self.prefix()
            dst = self.prefix()
            port = None
            if self.at("dst-port"):
                self.next()
                port = self.integer("port", lo=0, hi=65535)
            last = self.end()
            rules.append(AclRule(seq, action.text, proto.text, src, dst, port, span=(first.line, last)))
        last = self.expect("}").line
        return AclDef(name, tuple(rules), span=(kw.line, last))

    # post-parse checks
    def resolve(self, config):
        lookups = {
            "acl": config.acl,
            "policy": config.policy,
            "prefix-list": config.prefix_list,
            "community-list": config.community_list,
            "as-path-list": config.aspath_list,
            "peer-group": (config.bgp.peer_group if config.bgp else (lambda n: None)),
        }
        for kind, name, line in self.refs:
            if lookups[kind](name) is None:
                raise UnresolvedReference(name, line, self.filename, kind=kind)

    def check_spans(self, config):
        from .elements import element_spans, top_level_spans

        for label, spans in (("stanza", top_level_spans(config)), ("element", element_spans(config))):
            ordered = sorted(spans, key=lambda s: (s[1][0], s[1][1]))
            for (n1, s1), (n2, s2) in zip(ordered, ordered[1:]):
                if s2[0] <= s1[1]:
                    raise ConfigSyntaxError(
                        f"{label} {n2} shares line {s2[0]} with {n1}", s2[0], self.filename)


def parse_config(text, filename="<string>"):
    """Parse one device's configuration text into a :class:`DeviceConfig`."""
    return _Parser(text, filename).parse()


def parse_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))

"""IFG node types."""
from __future__ import annotations

from dataclasses import dataclass, field

CONFIG = "config"
MAIN = "main"
PROTO = "proto"
ACL = "acl"
MSG = "msg"
EDGE = "edge"
PATH = "path"
DISJ = "disj"

KINDS = (CONFIG, MAIN, PROTO, ACL, MSG, EDGE, PATH, DISJ)

PRE_IMPORT = "pre_import"
POST_IMPORT = "post_import"

# child kind -> kinds allowed as direct parents
ALLOWED_PARENTS = {
    CONFIG: frozenset(),
    MAIN: frozenset({PROTO, MAIN, DISJ}),
    PROTO: frozenset({MSG, CONFIG, MAIN, DISJ}),
    ACL: frozenset({CONFIG}),
    MSG: frozenset({PROTO, MSG, EDGE, CONFIG, DISJ}),
    EDGE: frozenset({CONFIG, PATH, DISJ}),
    PATH: frozenset({MAIN, ACL}),
    DISJ: frozenset({PROTO, MAIN, PATH}),
}


@dataclass(frozen=True)
class Fact:
    kind: str
    key: tuple
    payload: object = field(default=None, compare=False, hash=False, repr=False)

    @property
    def id(self):
        return (self.kind, self.key)

    def __str__(self):
        return f"{self.kind}{_fmt(self.key)}"


def _fmt(key):
    return "(" + ", ".join(_fmt(k) if isinstance(k, tuple) else str(k) for k in key) + ")"


def config_fact(eid):
    return Fact(CONFIG, tuple(eid), eid)


def main_fact(entry):
    return Fact(MAIN, entry.key, entry)


def proto_fact(entry):
    return Fact(PROTO, entry.key, entry)


def acl_fact(entry):
    return Fact(ACL, entry.key, entry)


def message_fact(edge_id, prefix, stage, attrs):
    return Fact(MSG, (edge_id, str(prefix), stage), attrs)


def edge_fact(edge):
    return Fact(EDGE, (edge.id,), edge)


def path_fact(path):
    return Fact(PATH, path.key, path)


def disjunctive(child, site):
    """Disjunctive node for one uncertainty ``site`` below ``child``."""
    return Fact(DISJ, (child.kind, child.key, site))


def jsonable(x):
    if isinstance(x, tuple):
        return [jsonable(v) for v in x]
    return x

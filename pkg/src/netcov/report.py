"""Line-level coverage, lcov emission, aggregate tables and report diffs."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .config.elements import (
    ACL_RULE, AGGREGATE, ASPATH_LIST, BGP_PEER, BGP_PEER_GROUP, COMMUNITY_LIST, INTERFACE,
    NETWORK, POLICY_CLAUSE, PREFIX_LIST, REDISTRIBUTION, STATIC_ROUTE,
)
from .labeling import STRONG, WEAK

SCHEMA = "netcov.report/1"
UNCOVERED = "uncovered"
DEAD = "dead"
_RANK = {STRONG: 3, WEAK: 2, UNCOVERED: 1, DEAD: 0}

BUCKETS = ("interfaces", "bgp", "policies", "lists", "other")
BUCKET_OF_TYPE = {
    INTERFACE: "interfaces",
    BGP_PEER: "bgp", BGP_PEER_GROUP: "bgp", NETWORK: "bgp", AGGREGATE: "bgp",
    REDISTRIBUTION: "bgp",
    POLICY_CLAUSE: "policies",
    PREFIX_LIST: "lists", COMMUNITY_LIST: "lists", ASPATH_LIST: "lists",
    STATIC_ROUTE: "other", ACL_RULE: "other",
}


def _container_bucket(name):
    if name == "bgp":
        return "bgp"
    return "policies" if name.startswith("policy:") else "other"


def pct(num, den):
    """Percentage rounded half-up to one decimal place."""
    if den == 0:
        return 0.0
    value = Decimal(num) * 100 / Decimal(den)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass
class FileCoverage:
    path: str
    host: str
    lines: dict = field(default_factory=dict)  # considered line -> status
    buckets: dict = field(default_factory=dict)  # considered line -> bucket

    def count(self, status):
        return sum(1 for s in self.lines.values() if s == status)

    @property
    def considered(self):
        return len(self.lines)

    @property
    def strong(self):
        return self.count(STRONG)

    @property
    def weak(self):
        return self.count(WEAK)

    @property
    def covered(self):
        return self.strong + self.weak


def lines_from_elements(labels, network):
    """Per-file line statuses: strong, weak, uncovered or dead.

    Lines of a covered element take its label. Stanza lines that belong to no
    element (a policy header, the bgp block's own settings) take the strongest
    label among the stanza's elements. Comments, blank lines and the device
    line are not considered.
    """
    elements = network.elements
    containers = network.containers()
    out = {}
    for host in network.hosts:
        cfg = network.config(host)
        fc = FileCoverage(cfg.source_file, host)
        considered = set(cfg.token_lines) - {cfg.device_line}
        status = {}
        for e in elements.values():
            if e.id.host != host:
                continue
            s = labels.get(e.id) or (UNCOVERED if e.referenced else DEAD)
            for line in range(e.line_span[0], e.line_span[1] + 1):
                if line in considered:
                    status[line] = s
                    fc.buckets[line] = BUCKET_OF_TYPE[e.id.type]
        for c in containers:
            if c.host != host:
                continue
            kids = [labels.get(k) or (UNCOVERED if elements[k].referenced else DEAD)
                    for k in c.children]
            s = max(kids, key=_RANK.get) if kids else DEAD
            for line in range(c.span[0], c.span[1] + 1):
                if line in considered and line not in status:
                    status[line] = s
                    fc.buckets[line] = _container_bucket(c.name)
        fc.lines = dict(sorted(status.items()))
        out[cfg.source_file] = fc
    return dict(sorted(out.items()))


def emit_lcov(files, out_dir):
    """Write coverage.strong.lcov and coverage.weak.lcov; returns the two paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for label in (STRONG, WEAK):
        chunks = []
        for path, fc in sorted(files.items()):
            chunks.append(f"SF:{path}\n")
            hit = 0
            for line, s in sorted(fc.lines.items()):
                n = 1 if s == label else 0
                hit += n
                chunks.append(f"DA:{line},{n}\n")
            chunks.append(f"LF:{fc.considered}\nLH:{hit}\nend_of_record\n")
        target = os.path.join(out_dir, f"coverage.{label}.lcov")
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(chunks))
        paths.append(target)
    return paths


def _row(considered, strong, weak):
    return {
        "considered": considered, "strong": strong, "weak": weak, "covered": strong + weak,
        "strong_pct": pct(strong, considered), "weak_pct": pct(weak, considered),
        "covered_pct": pct(strong + weak, considered),
    }


def aggregate(files):
    """Overall, per-bucket and per-file tables."""
    per_file = []
    buckets = {b: [0, 0, 0] for b in BUCKETS}
    for path, fc in files.items():
        per_file.append({"file": path, "host": fc.host, **_row(fc.considered, fc.strong, fc.weak)})
        for line, s in fc.lines.items():
            b = buckets[fc.buckets[line]]
            b[0] += 1
            b[1] += s == STRONG
            b[2] += s == WEAK
    total = _row(sum(r["considered"] for r in per_file), sum(r["strong"] for r in per_file),
                 sum(r["weak"] for r in per_file))
    rng = {}
    if per_file:
        lo = min(per_file, key=lambda r: (r["covered_pct"], r["file"]))
        hi = max(per_file, key=lambda r: (r["covered_pct"], r["file"]))
        rng = {"min": {"file": lo["file"], "covered_pct": lo["covered_pct"]},
               "max": {"file": hi["file"], "covered_pct": hi["covered_pct"]}}
    return {
        "summary": total,
        "buckets": [{"bucket": b, **_row(*buckets[b])} for b in BUCKETS],
        "files": per_file,
        "file_range": rng,
    }


def dead_code(elements):
    """Elements that nothing references, sorted by id."""
    return sorted((e for e in elements if not e.referenced), key=lambda e: tuple(e.id))


@dataclass
class CoverageReport:
    files: dict
    labels: dict
    network: object
    tests: list = field(default_factory=list)
    dataplane: float = 0.0

    def tables(self):
        return aggregate(self.files)

    def to_json(self):
        elements = sorted(self.network.elements.values(), key=lambda e: tuple(e.id))
        dead = dead_code(elements)
        return {
            "schema": SCHEMA,
            **self.tables(),
            "dataplane_coverage": round(self.dataplane, 6),
            "lines": {path: {str(k): v for k, v in fc.lines.items()}
                      for path, fc in self.files.items()},
            "elements": [
                {"id": str(e.id), "file": e.source_file, "span": list(e.line_span),
                 "label": self.labels.get(e.id, UNCOVERED), "referenced": e.referenced}
                for e in elements
            ],
            "dead": {"elements": [str(e.id) for e in dead],
                     "fraction": round(len(dead) / len(elements), 6) if elements else 0.0},
            "tests": self.tests,
        }

    def write_json(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def build_report(labels, network, tests=(), dataplane=0.0):
    return CoverageReport(lines_from_elements(labels, network), dict(labels), network,
                          list(tests), dataplane)


def _covered(status):
    return status in (STRONG, WEAK)


def diff(a, b):
    """Coverage change from report JSON ``a`` to report JSON ``b``."""
    gained, lost, relabeled = [], [], []
    for path in sorted(set(a["lines"]) | set(b["lines"])):
        la, lb = a["lines"].get(path, {}), b["lines"].get(path, {})
        for line in sorted(set(la) | set(lb), key=int):
            sa, sb = la.get(line, UNCOVERED), lb.get(line, UNCOVERED)
            if _covered(sb) and not _covered(sa):
                gained.append(f"{path}:{line}")
            elif _covered(sa) and not _covered(sb):
                lost.append(f"{path}:{line}")
            elif sa != sb and _covered(sa):
                relabeled.append(f"{path}:{line} {sa}->{sb}")
    ba = {r["bucket"]: r for r in a["buckets"]}
    buckets = [{"bucket": r["bucket"],
                "covered_pct_delta": round(r["covered_pct"] - ba.get(r["bucket"], {})
                                           .get("covered_pct", 0.0), 1)}
               for r in b["buckets"]]
    return {
        "covered_pct": [a["summary"]["covered_pct"], b["summary"]["covered_pct"]],
        "covered_pct_delta": round(b["summary"]["covered_pct"] - a["summary"]["covered_pct"], 1),
        "gained": gained,
        "lost": lost,
        "relabeled": relabeled,
        "buckets": buckets,
    }


def format_table(tables):
    """Plain-text summary for the terminal."""
    s = tables["summary"]
    lines = [f"{'bucket':<12}{'lines':>8}{'strong':>8}{'weak':>8}{'covered':>9}"]
    for r in tables["buckets"]:
        lines.append(f"{r['bucket']:<12}{r['considered']:>8}{r['strong']:>8}{r['weak']:>8}"
                     f"{r['covered_pct']:>8.1f}%")
    lines.append(f"{'total':<12}{s['considered']:>8}{s['strong']:>8}{s['weak']:>8}"
                 f"{s['covered_pct']:>8.1f}%")
    return "\n".join(lines)

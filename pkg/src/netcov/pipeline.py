"""End-to-end coverage computation: tests -> seeds -> IFG -> labels -> report."""
from __future__ import annotations

from dataclasses import dataclass

from .harness import dataplane_coverage, run_suite
from .ifg import build_ifg
from .labeling import STRONG, label_elements
from .report import aggregate, build_report, lines_from_elements


@dataclass
class CoverageResult:
    outcomes: list
    seeds: list
    direct: set
    ifg: object
    labels: dict
    report: object

    @property
    def failed(self):
        return [o for o in self.outcomes if o.status != "pass"]


def _labels(ifg, direct, weak_labeling, cap):
    if weak_labeling:
        return label_elements(ifg, direct=direct, cap=cap)
    return {e: STRONG for e in ifg.covered_elements() | set(direct)}


def compute_coverage(network, state, suite, *, workers=1, weak_labeling=True, bdd_cap=None,
                     per_test=True):
    """Run ``suite`` against ``state`` and attribute coverage to configuration lines."""
    outcomes, seeds, direct = run_suite(suite, state, network, workers=workers)
    ifg = build_ifg(seeds, state, network, workers=workers)
    labels = _labels(ifg, direct, weak_labeling, bdd_cap)
    tests = []
    for o in outcomes:
        row = {"name": o.name, "status": o.status, "message": o.message}
        if per_test:
            sub = ifg.restrict({f.id for f in o.tested_facts})
            sub_labels = _labels(sub, o.direct_elements, weak_labeling, bdd_cap)
            row.update(aggregate(lines_from_elements(sub_labels, network))["summary"])
            row["dataplane_coverage"] = round(dataplane_coverage(o.tested_facts, state), 6)
        tests.append(row)
    report = build_report(labels, network, tests, dataplane_coverage(seeds, state))
    return CoverageResult(outcomes, seeds, direct, ifg, labels, report)

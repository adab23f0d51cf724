"""``netcov`` command line.

Exit status: 0 when everything ran and every test passed, 1 when some test
failed or errored (coverage is still written), 2 when the pipeline itself
could not run.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

from . import fattree
from .config import load_network
from .errors import ConfigError, NetcovError
from .harness import load_suite
from .ifg import build_ifg
from .harness import run_suite
from .pipeline import compute_coverage
from .report import diff, emit_lcov, format_table
from .sim import Environment, load_environment, simulate
from .state import StableState

log = logging.getLogger("netcov")

EXIT_OK, EXIT_TESTS_FAILED, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    config_dir: str | None = None
    topology_file: str | None = None
    environment_file: str | None = None
    suite_file: str | None = None
    snapshot_in: str | None = None
    snapshot_out: str | None = None
    out_dir: str = "netcov-out"
    dump_ifg: str | None = None
    weak_labeling: bool = True
    workers: int = 1
    bdd_cap: int | None = None

    @classmethod
    def from_args(cls, ns):
        return cls(
            config_dir=ns.configs,
            topology_file=getattr(ns, "topology", None),
            environment_file=getattr(ns, "environment", None),
            suite_file=getattr(ns, "suite", None),
            snapshot_in=getattr(ns, "snapshot_in", None),
            snapshot_out=getattr(ns, "snapshot_out", None),
            out_dir=getattr(ns, "out", None) or "netcov-out",
            dump_ifg=getattr(ns, "dump_ifg", None),
            weak_labeling=not getattr(ns, "no_weak_labeling", False),
            workers=getattr(ns, "workers", 1),
            bdd_cap=getattr(ns, "bdd_cap", None),
        )


def _stable_state(run, network):
    if run.snapshot_in:
        return StableState.load(run.snapshot_in)
    env = load_environment(run.environment_file) if run.environment_file else Environment()
    state = simulate(network, env)
    log.info("converged in %d rounds", state.rounds)
    if run.snapshot_out:
        state.save(run.snapshot_out)
    return state


def _network(run):
    return load_network(run.config_dir, run.topology_file, workers=run.workers)


def cmd_simulate(run):
    network = _network(run)
    state = _stable_state(run, network)
    if not run.snapshot_out:
        json.dump(state.to_json(), sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
    return EXIT_OK


def _load_suite(run, network, state):
    if not run.suite_file:
        return []
    return load_suite(run.suite_file, network, state)


def cmd_cover(run):
    network = _network(run)
    state = _stable_state(run, network)
    suite = _load_suite(run, network, state)
    result = compute_coverage(network, state, suite, workers=run.workers,
                              weak_labeling=run.weak_labeling, bdd_cap=run.bdd_cap)
    os.makedirs(run.out_dir, exist_ok=True)
    emit_lcov(result.report.files, run.out_dir)
    result.report.write_json(os.path.join(run.out_dir, "coverage.json"))
    if run.dump_ifg:
        result.ifg.dump(run.dump_ifg)
    for o in result.outcomes:
        line = f"{o.status.upper():<5} {o.name}"
        print(line + (f": {o.message}" if o.message else ""))
    print(format_table(result.report.tables()))
    print(f"data plane coverage {100 * result.report.dataplane:.1f}%")
    return EXIT_TESTS_FAILED if result.failed else EXIT_OK


def cmd_dump_ifg(run):
    network = _network(run)
    state = _stable_state(run, network)
    suite = _load_suite(run, network, state)
    _, seeds, _ = run_suite(suite, state, network, workers=run.workers)
    ifg = build_ifg(seeds, state, network, workers=run.workers)
    if run.dump_ifg:
        ifg.dump(run.dump_ifg)
    else:
        json.dump(ifg.to_json(), sys.stdout, indent=1)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_gen_fattree(k, out_dir):
    n = fattree.generate(k, out_dir)
    print(f"wrote {n} devices to {out_dir}")
    return EXIT_OK


def cmd_diff(report_a, report_b, as_json=False):
    with open(report_a, encoding="utf-8") as fh:
        a = json.load(fh)
    with open(report_b, encoding="utf-8") as fh:
        b = json.load(fh)
    d = diff(a, b)
    if as_json:
        json.dump(d, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
        return EXIT_OK
    before, after = d["covered_pct"]
    print(f"covered {before:.1f}% -> {after:.1f}% ({d['covered_pct_delta']:+.1f})")
    for r in d["buckets"]:
        print(f"  {r['bucket']:<12}{r['covered_pct_delta']:+.1f}")
    for tag, items in (("+", d["gained"]), ("-", d["lost"]), ("~", d["relabeled"])):
        for item in items:
            print(f"{tag} {item}")
    return EXIT_OK


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _inputs(p, *, suite):
    p.add_argument("--configs", required=True, help="directory of *.cfg files")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--snapshot-in", help="reuse a stable state written by `simulate`")
    src.add_argument("--topology", help="topology JSON (list of links)")
    p.add_argument("--environment", help="external announcements and link failures")
    if suite:
        p.add_argument("--suite", help="test suite JSON")
    p.add_argument("--workers", type=_positive, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="netcov", description="Configuration coverage for "
                                     "network tests.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="compute and save the stable state")
    _inputs(p, suite=False)
    p.add_argument("--snapshot-out", help="write the snapshot here instead of stdout")

    p = sub.add_parser("cover", help="run tests and write coverage reports")
    _inputs(p, suite=True)
    p.add_argument("--snapshot-out")
    p.add_argument("--out", default="netcov-out", help="output directory")
    p.add_argument("--dump-ifg", metavar="PATH", help="also write the IFG as JSON")
    p.add_argument("--no-weak-labeling", action="store_true",
                   help="label every covered element strong")
    p.add_argument("--bdd-cap", type=_positive, help="BDD node limit (default NETCOV_BDD_CAP)")

    p = sub.add_parser("dump-ifg", help="materialize and print the IFG for a suite")
    _inputs(p, suite=True)
    p.add_argument("--snapshot-out")
    p.add_argument("--out", dest="dump_ifg", metavar="PATH")

    p = sub.add_parser("gen-fattree", help="generate a k-ary fat-tree fabric")
    p.add_argument("-k", type=int, default=4)
    p.add_argument("--out", required=True)

    p = sub.add_parser("diff", help="coverage change between two JSON reports")
    p.add_argument("before")
    p.add_argument("after")
    p.add_argument("--json", action="store_true")
    return parser


def _validate(ns, parser):
    if getattr(ns, "snapshot_in", None) and getattr(ns, "environment", None):
        parser.error("--snapshot-in cannot be combined with --environment")


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    _validate(ns, parser)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if ns.command == "gen-fattree":
            return cmd_gen_fattree(ns.k, ns.out)
        if ns.command == "diff":
            return cmd_diff(ns.before, ns.after, ns.json)
        run = RunConfig.from_args(ns)
        return {"simulate": cmd_simulate, "cover": cmd_cover, "dump-ifg": cmd_dump_ifg}[
            ns.command](run)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (NetcovError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Configuration coverage for network tests.

Typical use::

    from netcov import load_network, simulate, load_suite, compute_coverage

    net = load_network("configs/", "topology.json")
    state = simulate(net)
    result = compute_coverage(net, state, load_suite("suite.json", net, state))
    result.report.write_json("coverage.json")
"""
from .config import load_network
from .harness import load_suite
from .pipeline import CoverageResult, compute_coverage
from .sim import Environment, load_environment, simulate
from .state import StableState

__version__ = "0.1.0"

__all__ = [
    "CoverageResult", "Environment", "StableState", "compute_coverage", "load_environment",
    "load_network", "load_suite", "simulate",
]

"""Declarative network tests and their execution."""
from .archetypes import ARCHETYPES, expand
from .runner import (
    dataplane_coverage, run_policy_check, run_preference_check, run_reachability, run_suite,
    run_test,
)
from .spec import (
    ExportCheck, PolicyCheck, PolicySelector, PreferenceCheck, Reachability, RoutePresent,
    TestOutcome, load_suite, parse_test,
)

__all__ = [
    "ARCHETYPES", "ExportCheck", "PolicyCheck", "PolicySelector", "PreferenceCheck",
    "Reachability", "RoutePresent", "TestOutcome", "dataplane_coverage", "expand", "load_suite",
    "parse_test", "run_policy_check", "run_preference_check", "run_reachability", "run_suite",
    "run_test",
]

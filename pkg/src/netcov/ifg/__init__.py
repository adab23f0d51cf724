"""Information-flow graph: facts, inference rules and lazy materialization."""
from .engine import IFG, build_ifg, covered_elements
from .facts import Fact
from .rules import DEFAULT_RULES, InferenceRule

__all__ = ["DEFAULT_RULES", "Fact", "IFG", "InferenceRule", "build_ifg", "covered_elements"]

"""Control-plane simulation and data-plane tracing."""
from .engine import (
    derive_local_routes, establish_sessions, path_taint, propagate_to_fixed_point, round_limit,
    session_paths, simulate,
)
from .environment import Announcement, Environment, load_environment
from .trace import Drop, Hop, Path, TraceResult, trace_path

__all__ = [
    "Announcement", "Drop", "Environment", "Hop", "Path", "TraceResult", "derive_local_routes",
    "establish_sessions", "load_environment", "path_taint", "propagate_to_fixed_point",
    "round_limit", "session_paths", "simulate", "trace_path",
]

from .elements import (
    ConfigElement, Container, EffectivePeerSettings, ElementId, extract_elements,
    resolve_peer_group,
)
from .model import DeviceConfig
from .network import Link, Network, load_network, load_topology
from .parser import parse_config, parse_file
from .printer import format_config

__all__ = [
    "ConfigElement", "Container", "DeviceConfig", "EffectivePeerSettings", "ElementId",
    "Link", "Network", "extract_elements", "format_config", "load_network", "load_topology",
    "parse_config", "parse_file", "resolve_peer_group",
]

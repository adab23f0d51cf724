"""A parsed snapshot: every device's config plus the physical topology."""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import ConfigError, DuplicateDefinition
from .elements import containers, extract_elements
from .parser import parse_file

CONFIG_SUFFIX = ".cfg"


@dataclass(frozen=True)
class Link:
    device_a: str
    iface_a: str
    device_b: str
    iface_b: str

    @property
    def id(self):
        a, b = sorted([(self.device_a, self.iface_a), (self.device_b, self.iface_b)])
        return f"{a[0]}:{a[1]}--{b[0]}:{b[1]}"


def load_topology(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("links", [])
    return [Link(d["deviceA"], d["ifaceA"], d["deviceB"], d["ifaceB"]) for d in raw]


@dataclass
class Network:
    configs: dict  # hostname -> DeviceConfig
    links: list = field(default_factory=list)

    def __post_init__(self):
        self._elements = None
        self._validate_links()

    def _validate_links(self):
        seen = {}
        for link in self.links:
            for dev, iface in ((link.device_a, link.iface_a), (link.device_b, link.iface_b)):
                cfg = self.configs.get(dev)
                if cfg is None or cfg.interface(iface) is None:
                    raise ConfigError(f"topology references unknown interface {dev}:{iface}")
                if (dev, iface) in seen:
                    raise ConfigError(f"interface {dev}:{iface} appears in two links")
                seen[(dev, iface)] = link

    @property
    def hosts(self):
        return sorted(self.configs)

    def config(self, host):
        return self.configs[host]

    @property
    def elements(self):
        """All configuration elements, keyed by id."""
        if self._elements is None:
            self._elements = {}
            for host in self.hosts:
                for e in extract_elements(self.configs[host]):
                    self._elements[e.id] = e
        return self._elements

    def containers(self):
        out = []
        for host in self.hosts:
            out += containers(self.configs[host])
        return out


def load_network(config_dir, topology_file=None, workers=1):
    """Parse every ``*.cfg`` file under ``config_dir``."""
    paths = sorted(
        os.path.join(config_dir, name)
        for name in os.listdir(config_dir)
        if name.endswith(CONFIG_SUFFIX)
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parsed = list(pool.map(parse_file, paths))
    else:
        parsed = [parse_file(p) for p in paths]
    configs = {}
    for cfg in parsed:
        if cfg.hostname in configs:
            raise DuplicateDefinition(f"device {cfg.hostname}", cfg.device_line, cfg.source_file)
        configs[cfg.hostname] = cfg
    links = load_topology(topology_file) if topology_file else []
    return Network(configs, links)

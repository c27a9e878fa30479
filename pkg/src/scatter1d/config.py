"""Run configuration: defaults, flat ``key = value`` files, environment."""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields

from .model import Constants, DEFAULT_RANGE_THRESHOLD, get_potential


@dataclass
class RunConfig:
    hbar: float = 1.0
    mass: float = 1.0
    potential_name: str = "jolanta"
    potential_range_threshold: float = DEFAULT_RANGE_THRESHOLD
    potential_table: str = ""
    potential_scale: float = 1.0
    fd_dx: float = 1e-3
    fd_pad: float = 0.0            # 0 means two wavelengths at the lowest energy
    scan_emin: float = 0.1
    scan_emax: float = 2.0
    scan_n: int = 2000
    siegert_n: int = 40
    siegert_a: float = 15.0
    siegert_basis: str = "legendre"
    siegert_range_tolerance: float = 1e-6
    compare_n: int = 200
    wavepacket_k0: float = 1.2
    wavepacket_sigma: float = 0.08
    wavepacket_nodes: int = 257
    wavepacket_times: str = "-200,0,200"
    wavepacket_xmin: float = -400.0
    wavepacket_xmax: float = 400.0
    wavepacket_xstep: float = 0.1
    threads: int = 0               # 0 means numba's default

    @property
    def constants(self) -> Constants:
        return Constants(self.hbar, self.mass)

    @property
    def pad(self):
        return self.fd_pad or None

    def potential(self):
        return get_potential(self.potential_name, self.potential_range_threshold,
                             self.potential_table or None, self.potential_scale)

    def times(self):
        return [float(t) for t in str(self.wavepacket_times).split(",") if t.strip()]

    def update(self, values: dict):
        types = {f.name: f.type for f in fields(self)}
        for key, val in values.items():
            name = key.replace(".", "_").replace("-", "_").lower()
            if name not in types:
                raise KeyError(f"unknown config key {key!r}")
            if val is None:
                continue
            cur = getattr(self, name)
            setattr(self, name, type(cur)(val) if not isinstance(cur, str) else str(val))
        return self


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; dotted prefixes (fd.dx, siegert.n, ...) act as sections."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    with open(path) as fh:
        cp.read_string("[root]\n" + fh.read())
    return dict(cp["root"])


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if path:
        cfg.update(read_config_file(path))
    env = os.environ.get("SCATTER1D_THREADS")
    if env:
        cfg.threads = int(env)
    if overrides:
        cfg.update(overrides)
    return cfg

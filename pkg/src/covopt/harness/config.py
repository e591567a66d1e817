"""Experiment configuration: a nested YAML document with a fixed schema.

Sections and keys (unknown keys are rejected)::

    domain:    name, layout, discs, v_max
    discovery: methods, options, laplacian, protocol, trajectories,
               steps_per_traj, full_initiation, option_counts
    learning:  episodes, max_steps, alpha, gamma, epsilon, runs,
               interval_steps, batch, max_options
    covertime: trajectories_per_start, metric
    study:     num_graphs, n, density, trajectories
    seed:      master seed
    output:    output directory
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from ..exceptions import ConfigError

DOMAINS = ("grid9x9", "fourroom", "taxi", "hanoi", "parr_maze", "race_track", "grid", "graph")
METHODS = ("covering", "eigen", "betweenness", "none")
PROTOCOLS = ("offline-exact", "offline-sampled", "online")
METRICS = ("hitting", "max", "mean")


@dataclass
class DomainSection:
    name: str = "grid9x9"
    layout: str | None = None
    discs: int = 4
    v_max: int = 4


@dataclass
class DiscoverySection:
    methods: list = field(default_factory=lambda: ["covering", "eigen", "none"])
    options: int = 8
    laplacian: str = "normalized"
    protocol: str = "offline-exact"
    trajectories: int = 100
    steps_per_traj: int = 100
    full_initiation: bool = False
    option_counts: list = field(default_factory=list)


@dataclass
class LearningSection:
    episodes: int = 100
    max_steps: int = 100
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon: float = 0.1
    runs: int = 5
    interval_steps: int = 500
    batch: int = 4
    max_options: int = 32


@dataclass
class CoverTimeSection:
    trajectories_per_start: int = 10_000
    metric: str = "hitting"


@dataclass
class StudySection:
    num_graphs: int = 100
    n: int = 10
    density: float = 0.3
    trajectories: int = 1000


SECTIONS = {
    "domain": DomainSection,
    "discovery": DiscoverySection,
    "learning": LearningSection,
    "covertime": CoverTimeSection,
    "study": StudySection,
}


@dataclass
class ExperimentConfig:
    domain: DomainSection = field(default_factory=DomainSection)
    discovery: DiscoverySection = field(default_factory=DiscoverySection)
    learning: LearningSection = field(default_factory=LearningSection)
    covertime: CoverTimeSection = field(default_factory=CoverTimeSection)
    study: StudySection = field(default_factory=StudySection)
    seed: int = 0
    output: str = "out"
    source: Path | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_dict(cls, data, source=None) -> "ExperimentConfig":
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping at the top level")
        top = {f.name for f in fields(cls)} - {"source"}
        unknown = sorted(set(data) - top)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        kwargs = {}
        for name, section in SECTIONS.items():
            kwargs[name] = _section(section, data.get(name), name)
        kwargs["seed"] = _typed(data.get("seed", 0), int, "seed")
        kwargs["output"] = _typed(data.get("output", "out"), str, "output")
        cfg = cls(**kwargs, source=None if source is None else Path(source))
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {name: asdict(getattr(self, name)) for name in SECTIONS}
        out["seed"] = self.seed
        out["output"] = self.output
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)

    @classmethod
    def from_yaml(cls, text: str, source=None) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from None
        return cls.from_dict(data, source)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        return cls.from_yaml(p.read_text(encoding="utf-8"), source=p)

    def save(self, path) -> None:
        Path(path).write_text(self.to_yaml(), encoding="utf-8")

    def validate(self) -> None:
        d, disc, lr = self.domain, self.discovery, self.learning
        if d.name not in DOMAINS:
            raise ConfigError(f"domain.name must be one of {DOMAINS}, got {d.name!r}")
        if d.name in ("grid", "graph") and not d.layout:
            raise ConfigError(f"domain {d.name!r} needs domain.layout")
        bad = [m for m in disc.methods if m not in METHODS]
        if bad or not disc.methods:
            got = f" (unknown: {', '.join(map(str, bad))})" if bad else ""
            raise ConfigError(f"discovery.methods must be a non-empty subset of {METHODS}{got}")
        if disc.protocol not in PROTOCOLS:
            raise ConfigError(f"discovery.protocol must be one of {PROTOCOLS}")
        if disc.laplacian not in ("normalized", "combinatorial"):
            raise ConfigError("discovery.laplacian must be 'normalized' or 'combinatorial'")
        if disc.options < 0 or disc.options % 2:
            raise ConfigError("discovery.options must be even and non-negative")
        counts = disc.option_counts
        if any(not isinstance(c, int) or c < 0 or c % 2 for c in counts) or counts != sorted(counts):
            raise ConfigError("discovery.option_counts must be even, non-negative and ascending")
        if self.covertime.metric not in METRICS:
            raise ConfigError(f"covertime.metric must be one of {METRICS}")
        for name, value in [("learning.episodes", lr.episodes), ("learning.max_steps", lr.max_steps),
                            ("learning.runs", lr.runs), ("learning.interval_steps", lr.interval_steps),
                            ("discovery.trajectories", disc.trajectories),
                            ("covertime.trajectories_per_start", self.covertime.trajectories_per_start),
                            ("study.num_graphs", self.study.num_graphs),
                            ("study.trajectories", self.study.trajectories)]:
            if value < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name, value in [("alpha", lr.alpha), ("gamma", lr.gamma), ("epsilon", lr.epsilon)]:
            if not 0 <= value <= 1:
                raise ConfigError(f"learning.{name} must lie in [0, 1]")

    def resolve_layout(self) -> str | None:
        """Layout path: as given, else relative to the config file, else a shipped name."""
        lay = self.domain.layout
        if lay is None:
            return None
        p = Path(lay)
        if p.exists():
            return str(p)
        if self.source is not None and (self.source.parent / p).exists():
            return str(self.source.parent / p)
        return lay


def _typed(value, kind, name):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is bool and not isinstance(value, bool):
        raise ConfigError(f"{name} must be true or false")
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not isinstance(value, kind):
        raise ConfigError(f"{name} must be of type {kind.__name__}, got {value!r}")
    return value


_TYPES = {"int": int, "float": float, "str": str, "bool": bool, "list": list}


def _section(cls, data, prefix):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix} must be a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in {prefix}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        ann = str(known[name].type)
        if ann == "str | None":
            if value is not None:
                _typed(value, str, f"{prefix}.{name}")
            kwargs[name] = value
            continue
        kwargs[name] = _typed(value, _TYPES[ann], f"{prefix}.{name}")
    return cls(**kwargs)

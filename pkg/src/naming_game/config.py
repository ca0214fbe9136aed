"""Experiment configuration: parsing, normalisation and initial states."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .engine import Configuration
from .graphs import BUILDERS, Graph
from .model import FitnessParams, State

FORMATS = ("csv", "json")

# accepted spellings -> canonical key
_ALIASES = {
    "graph": "graph", "phi": "phi", "phi_a": "phi_a", "phi-a": "phi_a", "phi_b": "phi_b",
    "phi-b": "phi_b", "init": "init", "replicates": "replicates", "seed": "seed",
    "max_events": "max_events", "max-events": "max_events", "out": "out", "format": "format",
    "strict_timeout": "strict_timeout", "strict-timeout": "strict_timeout",
}


def normalize_graph(spec: str) -> str:
    family, sep, arg = str(spec).strip().partition(":")
    family = family.strip().lower()
    if not sep:
        raise ValueError(f"graph spec {spec!r} is not family:size")
    if family == "edges":
        return f"edges:{arg.strip()}"
    if family not in BUILDERS:
        raise ValueError(f"unknown graph family {family!r}")
    return f"{family}:{int(arg)}"


def normalize_init(spec: str) -> str:
    kind, sep, arg = str(spec).strip().partition(":")
    kind = kind.strip().lower()
    if kind == "single-ab":
        arg = arg.strip().lower()
        if arg in ("", "all"):
            return "single-ab:all"
        v = int(arg)
        if v < 0:
            raise ValueError("start vertex must be non-negative")
        return f"single-ab:{v}"
    if kind == "step":
        return "step" if not arg.strip() else f"step:{int(arg)}"
    if kind == "custom":
        states = [State.parse(x).name for x in arg.split(",")]
        return "custom:" + ",".join(states)
    raise ValueError(f"unknown init spec {spec!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    graph: str = "complete:20"
    phi_a: float = 1.0
    phi_b: float = 1.0
    init: str = "single-ab:all"
    replicates: int = 100
    seed: int = 0
    max_events: int | None = None
    out: str | None = None
    format: str = "json"
    strict_timeout: bool = False

    def __post_init__(self):
        object.__setattr__(self, "graph", normalize_graph(self.graph))
        object.__setattr__(self, "init", normalize_init(self.init))
        object.__setattr__(self, "phi_a", float(self.phi_a))
        object.__setattr__(self, "phi_b", float(self.phi_b))
        FitnessParams(self.phi_a, self.phi_b)
        if int(self.replicates) < 1:
            raise ValueError("replicates must be at least 1")
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "seed", int(self.seed))
        if self.max_events is not None:
            if int(self.max_events) < 1:
                raise ValueError("max_events must be positive")
            object.__setattr__(self, "max_events", int(self.max_events))
        fmt = str(self.format).lower()
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        object.__setattr__(self, "format", fmt)
        object.__setattr__(self, "strict_timeout", bool(self.strict_timeout))

    @property
    def params(self) -> FitnessParams:
        return FitnessParams(self.phi_a, self.phi_b)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kw = {}
        for k, v in d.items():
            key = _ALIASES.get(k.lower())
            if key is None:
                raise ValueError(f"unknown config key {k!r}")
            kw[key] = v
        if "phi" in kw:
            if "phi_a" in kw or "phi_b" in kw:
                raise ValueError("give either phi or phi_a/phi_b, not both")
            kw["phi_a"], kw["phi_b"] = kw.pop("phi"), 1.0
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def initial_configurations(cfg: ExperimentConfig, g: Graph):
    """Start states requested by ``cfg.init`` as [(start vertex or None, Configuration)]."""
    n = g.n_vertices
    kind, _, arg = cfg.init.partition(":")
    note = ""
    if kind == "single-ab":
        if arg == "all":
            if g.vertex_transitive:
                verts = [0]
                note = f"{g.family} is vertex-transitive; vertex 0 represents every start"
            else:
                verts = list(range(n))
                note = "minimum over all start vertices (finite-graph surrogate for the infimum)"
        else:
            verts = [int(arg)]
        return [(v, Configuration.single_ab(n, v)) for v in verts], note
    if kind == "step":
        k = int(arg) if arg else n // 2
        states = [State.A] * k + [State.B] * (n - k)
        return [(None, Configuration.from_states(states))], note
    states = arg.split(",")
    if len(states) != n:
        raise ValueError(f"custom init has {len(states)} states, graph has {n} vertices")
    return [(None, Configuration.from_states(states))], note

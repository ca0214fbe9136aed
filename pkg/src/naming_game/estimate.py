"""Monte Carlo estimates of the invasion probability with Wilson intervals."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from statistics import NormalDist

import numpy as np

log = logging.getLogger(__name__)

Z95 = NormalDist().inv_cdf(0.975)

SWEEP_COLUMNS = ("graph", "N", "phi", "start_vertex", "replicates", "successes", "timeouts",
                 "p_hat", "ci_low", "ci_high", "seed")


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"{successes} successes out of {trials} trials")
    p = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # the exact interval always contains p; rounding must not break that
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class EstimateWithCI:
    successes: int
    trials: int
    point: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> "EstimateWithCI":
        lo, hi = wilson_interval(successes, trials)
        return cls(int(successes), int(trials), successes / trials, lo, hi)

    @property
    def se(self) -> float:
        """Plug-in binomial standard error of the point estimate."""
        return math.sqrt(self.point * (1 - self.point) / self.trials)

    def as_dict(self) -> dict:
        return {"successes": self.successes, "trials": self.trials, "point": self.point,
                "ci_low": self.ci_low, "ci_high": self.ci_high}


@dataclass(frozen=True)
class StartEstimate:
    start_vertex: int | None
    replicates: int
    timeouts: int
    estimate: EstimateWithCI | None  # None when every replicate timed out and timeouts are excluded


@dataclass(frozen=True)
class InvasionEstimate:
    graph: str
    phi: float
    per_start: list[StartEstimate]
    minimum: StartEstimate | None = field(default=None)
    note: str = ""

    def as_dict(self) -> dict:
        def one(s):
            return {"start_vertex": s.start_vertex, "replicates": s.replicates, "timeouts": s.timeouts,
                    **(s.estimate.as_dict() if s.estimate else {"point": None})}

        return {"graph": self.graph, "phi": self.phi,
                "per_start": [one(s) for s in self.per_start],
                "minimum": one(self.minimum) if self.minimum else None,
                "note": self.note}


def _parallel_batches(fn, seeds: np.ndarray, workers: int | None, chunk: int = 256):
    """Evaluate ``fn`` on seed chunks concurrently and concatenate in seed order."""
    chunks = [seeds[i:i + chunk] for i in range(0, seeds.size, chunk)] or [seeds]
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(chunks) == 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    return tuple(np.concatenate(col) for col in zip(*parts))


def summarise(kinds: np.ndarray, start_vertex, exclude_timeouts: bool) -> StartEstimate:
    from .engine import KIND_A, KIND_TIMEOUT

    successes = int(np.count_nonzero(kinds == KIND_A))
    timeouts = int(np.count_nonzero(kinds == KIND_TIMEOUT))
    trials = kinds.size - timeouts if exclude_timeouts else kinds.size
    est = EstimateWithCI.from_counts(successes, trials) if trials > 0 else None
    return StartEstimate(start_vertex, int(kinds.size), timeouts, est)


def estimate_invasion(cfg, workers: int | None = None, cell_offset: int = 0) -> InvasionEstimate:
    """Invasion frequency from each requested start vertex and the minimum over them.

    Replicate j from the i-th start uses seed ``derive_seed(cfg.seed, cell_offset + i, j)``.
    On vertex-transitive families a single start (vertex 0) represents all.
    """
    from .config import initial_configurations
    from .engine import run_batch
    from .graphs import from_spec
    from .rng import replicate_seeds

    g = from_spec(cfg.graph)
    params = cfg.params
    starts, note = initial_configurations(cfg, g)
    per = []
    for i, (vertex, init) in enumerate(starts):
        seeds = replicate_seeds(cfg.seed, cell_offset + i, cfg.replicates)
        kinds, _, _ = _parallel_batches(
            lambda s: run_batch(g, params, init, s, cfg.max_events), seeds, workers)
        per.append(summarise(kinds, vertex, cfg.strict_timeout))
    valid = [s for s in per if s.estimate is not None]
    minimum = min(valid, key=lambda s: s.estimate.point) if valid else None
    return InvasionEstimate(g.spec, params.phi, per, minimum, note)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def sweep(cfg, phis=None, sizes=None, workers: int | None = None) -> list[dict]:
    """One row per (size, phi, start vertex); cells enumerated size-major."""
    from .config import ExperimentConfig
    from .graphs import from_spec

    family, _, size = cfg.graph.partition(":")
    sizes = list(sizes) if sizes else [int(size)]
    phis = list(phis) if phis else [cfg.params.phi]
    rows = []
    cell = 0
    for n, phi in product(sizes, phis):
        sub = ExperimentConfig.from_dict({**cfg.to_dict(), "graph": f"{family}:{n}",
                                          "phi_a": phi, "phi_b": 1.0})
        base = {"graph": sub.graph, "phi": float(phi), "replicates": cfg.replicates, "seed": cfg.seed}
        try:
            n_vertices = from_spec(sub.graph).n_vertices
            est = estimate_invasion(sub, workers=workers, cell_offset=cell)
        except Exception as exc:  # recorded per row; the sweep goes on
            log.error("cell %d (%s, phi=%s) failed: %s", cell, sub.graph, phi, exc)
            rows.append({**base, "N": None, "start_vertex": None, "successes": None,
                         "timeouts": None, "p_hat": None, "ci_low": None, "ci_high": None})
            cell += 1
            continue
        for s in est.per_start:
            e = s.estimate
            rows.append({**base, "N": n_vertices, "start_vertex": s.start_vertex,
                         "successes": e.successes if e else None, "timeouts": s.timeouts,
                         "p_hat": e.point if e else None, "ci_low": e.ci_low if e else None,
                         "ci_high": e.ci_high if e else None})
            log.info("cell %d %s phi=%g start=%s p_hat=%s", cell, sub.graph, phi,
                     s.start_vertex, _fmt(e.point if e else None))
        cell += len(est.per_start)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()

"""Invasion frequency over a phi grid and a size grid; writes the sweep CSV."""
import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path

from naming_game.config import ExperimentConfig
from naming_game.estimate import rows_to_csv, sweep


@dataclass
class SweepConfig:
    family: str = "cycle"
    sizes: list = field(default_factory=lambda: [20, 50, 100])
    phis: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 3.0, 5.0])
    replicates: int = 1000
    seed: int = 0
    out: str = "out/invasion_sweep.csv"


def main(cfg: SweepConfig):
    base = ExperimentConfig(graph=f"{cfg.family}:{cfg.sizes[0]}", replicates=cfg.replicates, seed=cfg.seed)
    text = rows_to_csv(sweep(base, phis=cfg.phis, sizes=cfg.sizes))
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    Path(cfg.out).write_text(text)
    print(text, end="")


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--family", default=SweepConfig.family)
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")], default=SweepConfig().sizes)
    p.add_argument("--phis", type=lambda s: [float(x) for x in s.split(",")], default=SweepConfig().phis)
    p.add_argument("--replicates", type=int, default=SweepConfig.replicates)
    p.add_argument("--seed", type=int, default=SweepConfig.seed)
    p.add_argument("--out", default=SweepConfig.out)
    main(SweepConfig(**vars(p.parse_args())))

"""Interface speed across phi: exact curve, both critical ratios, simulated check points."""
import argparse
from dataclasses import dataclass

import numpy as np

from naming_game.interface import (
    build_model, critical_exact, critical_quadratic, simulate_interface, speed_sigma,
)
from naming_game.model import FitnessParams


@dataclass
class ThresholdConfig:
    phi_min: float = 0.5
    phi_max: float = 3.0
    points: int = 26
    t_max: float = 1e5
    seed: int = 0


def main(cfg: ThresholdConfig):
    c, ce = critical_quadratic(), critical_exact()
    print(f"c_quadratic = {c!r}\nc_exact     = {ce!r}\ngap         = {abs(ce - c):.3e}")
    print("phi,speed_exact,speed_sim,sigma")
    for i, phi in enumerate(np.linspace(cfg.phi_min, cfg.phi_max, cfg.points).tolist()):
        m = build_model(FitnessParams(phi))
        sim = simulate_interface(FitnessParams(phi), cfg.t_max, seed=cfg.seed + i)
        print(f"{phi!r},{m.speed!r},{sim.speed!r},{speed_sigma(m, cfg.t_max)!r}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(ThresholdConfig()).items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=type(default), default=default)
    main(ThresholdConfig(**vars(p.parse_args())))

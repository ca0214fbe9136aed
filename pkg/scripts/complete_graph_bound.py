"""Exact invasion probability on K_N against the 1 - 3/phi lower bound."""
import argparse
from dataclasses import dataclass, field

from naming_game.complete import CountState, exact_absorption
from naming_game.model import FitnessParams


@dataclass
class BoundConfig:
    sizes: list = field(default_factory=lambda: [2, 5, 10, 20, 30, 60])
    phis: list = field(default_factory=lambda: [2.0, 3.0, 3.5, 4.0, 6.0, 9.0, 9.9, 10.0, 20.0])


def main(cfg: BoundConfig):
    print("N,phi,p_A,bound,margin")
    for phi in cfg.phis:
        for N in cfg.sizes:
            p = exact_absorption(N, FitnessParams(phi))[CountState(0, N - 1, 1)]
            b = 1 - 3 / phi
            print(f"{N},{phi!r},{p!r},{b!r},{p - b:+.3e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")], default=BoundConfig().sizes)
    p.add_argument("--phis", type=lambda s: [float(x) for x in s.split(",")], default=BoundConfig().phis)
    main(BoundConfig(**vars(p.parse_args())))

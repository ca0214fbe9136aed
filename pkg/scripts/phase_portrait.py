"""Mean-field solution curves from a grid of starting points, one CSV per curve."""
import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from naming_game.meanfield import integrate_many, interior_fixed_point, jacobian_eB_eigenvalues
from naming_game.model import FitnessParams


@dataclass
class PortraitConfig:
    phi: float = 1.5
    grid: int = 8
    t_max: float = 200.0
    sample_dt: float = 0.1
    out_dir: str = "out/phase_portrait"


def starts(n: int) -> np.ndarray:
    pts = [(i / n, j / n, 1 - (i + j) / n) for i in range(n + 1) for j in range(n + 1 - i)]
    return np.array([p for p in pts if min(p) > 0 or max(p) < 1])


def main(cfg: PortraitConfig):
    params = FitnessParams(cfg.phi)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u0 = starts(cfg.grid)
    t, states, limits = integrate_many(u0, params, t_max=cfg.t_max, sample_dt=cfg.sample_dt,
                                       stop_on_convergence=False)
    for k in range(len(u0)):
        rows = np.column_stack([t, states[:, k, :]])
        np.savetxt(out / f"curve_{k:03d}.csv", rows, delimiter=",", header="t,u_A,u_B,u_AB", comments="")
    summary = [f"{a!r},{b!r},{c!r},{lim}" for (a, b, c), lim in zip(u0.tolist(), limits)]
    (out / "limits.csv").write_text("u_A,u_B,u_AB,limit\n" + "\n".join(summary) + "\n")
    print(f"phi={cfg.phi}: eigenvalues at e_B {jacobian_eB_eigenvalues(params)}")
    if 1 / 3 < cfg.phi < 3:
        fp = interior_fixed_point(params)
        print(f"interior equilibrium {fp.u} (saddle: {fp.is_saddle})")
    print({lim: limits.count(lim) for lim in set(limits)})


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(PortraitConfig()).items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=type(default), default=default)
    main(PortraitConfig(**vars(p.parse_args())))

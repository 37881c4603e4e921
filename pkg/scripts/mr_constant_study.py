"""Grid and data stability of the maximal-regularity constant on the Robin problem.

    python scripts/mr_constant_study.py --n-cells 16 --grids 64 128 256 --draws 5
"""

from dataclasses import dataclass, field

import numpy as np
from _common import parse_into, print_table

from maxreg.experiments import mr_study, robin_beta
from maxreg.robin import RobinProblem, assemble


@dataclass
class Config:
    n_cells: int = 16
    alpha: float = 0.6
    beta0: float = 1.0
    beta1: float = 0.5
    c: float = 1.0
    grids: list = field(default_factory=lambda: [64, 128, 256])
    draws: int = 5
    method: str = "representation"
    seed: int = 0


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    F = assemble(RobinProblem(cfg.n_cells, robin_beta("holder", cfg.beta0, cfg.beta1, cfg.c, cfg.alpha),
                              alpha=cfg.alpha, c=cfg.c))
    kw = {"tol": 1e-10} if cfg.method == "representation" else {}
    rows = mr_study(lambda grid: F, cfg.grids, cfg.draws, seed=cfg.seed, method=cfg.method, **kw)
    print_table(rows)
    for key in ("mr_constant", "sup_V_norm"):
        v = np.array([r[key] for r in rows])
        med = np.median(v)
        print(f"{key}: median {med:.4f}, max deviation {100 * np.abs(v / med - 1).max():.2f}%")


if __name__ == "__main__":
    main()

"""Damped Picard iteration for the Robin problem with solution-dependent coefficients.

    python scripts/nonlinear_picard.py --amplitude0 1.0 --amplitude1 0.5 --damping 0.5
"""

from dataclasses import dataclass

import numpy as np
from _common import parse_into, print_table

from maxreg.experiments import robin_beta, spectral_data
from maxreg.nonlinear import NonlinearProblem, beta_family, solve_fixed_point
from maxreg.robin import RobinProblem, assemble
from maxreg.solver import TimeGrid


@dataclass
class Config:
    n_cells: int = 32
    n_steps: int = 64
    family0: str = "tanh"
    amplitude0: float = 1.0
    family1: str = "tanh"
    amplitude1: float = 0.5
    damping: float = 0.5
    tol: float = 5e-9
    max_outer: int = 50


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    base = RobinProblem(cfg.n_cells, robin_beta("holder", 1.0, 1.0, 1.0, 0.5), alpha=0.5, c=1.0)
    F = assemble(base)
    grid = TimeGrid(1.0, cfg.n_steps)
    f, u0 = spectral_data(F, grid, np.ones(F.triple.dim), np.zeros(F.triple.dim))
    b0, s0 = beta_family(cfg.family0, cfg.amplitude0)
    b1, s1 = beta_family(cfg.family1, cfg.amplitude1)
    P = NonlinearProblem(base, b0, b1, s0, s1, damping=cfg.damping, tol=cfg.tol, max_outer=cfg.max_outer)
    res = solve_fixed_point(P, f, u0)
    print_table([{"iteration": i + 1, "residual": r, "mr_constant": m}
                 for i, (r, m) in enumerate(zip(res.residual_history, res.mr_constants))])
    print(f"converged after {res.outer_iterations} iterations at damping {res.damping}")


if __name__ == "__main__":
    main()

"""Square-root domain constants and the perturbation gap under mesh refinement.

    python scripts/sqrt_refinement.py --levels 16 32 64 --perturbation 0.1
"""

from dataclasses import dataclass, field

from _common import parse_into, print_table

from maxreg.experiments import sqrt_study


@dataclass
class Config:
    levels: list = field(default_factory=lambda: [16, 32, 64])
    alpha: float = 0.5
    c: float = 1.0
    beta0: float = 1.0
    beta1: float = 1.0
    t: float = 0.5
    perturbation: float = 0.1


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    problem = {"beta_family": "holder", "beta0": cfg.beta0, "beta1": cfg.beta1, "c": cfg.c,
               "alpha": cfg.alpha, "T": 1.0, "n_cells": cfg.levels[0]}
    print_table(sqrt_study(problem, cfg.levels, cfg.t, cfg.perturbation))


if __name__ == "__main__":
    main()

"""Space-time convergence of the Robin heat equation against a manufactured solution.

    python scripts/robin_convergence.py --variant growing --levels 16 32 64 128
"""

from dataclasses import dataclass, field

from _common import parse_into, print_table

from maxreg.experiments import robin_convergence


@dataclass
class Config:
    variant: str = "growing"  # separable, growing, rough_time, neumann, zero
    levels: list = field(default_factory=lambda: [16, 32, 64])
    steps_per_cell: int = 1
    scheme: str = "crank_nicolson"
    solver: str = "stepping"
    horizon: float = 1.0


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    problem = {"beta_family": cfg.variant, "T": cfg.horizon, "alpha": 0.5, "c": 1.0, "beta0": 1.0, "beta1": 1.0}
    rows = robin_convergence(problem, cfg.levels, cfg.steps_per_cell, cfg.scheme, cfg.solver)
    print_table(rows)


if __name__ == "__main__":
    main()

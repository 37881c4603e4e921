"""Shifted problem (S + mu, e^{-mu t} f) transformed back, against the direct solve.

Shows how the discrepancy scales with mu and the step size for both solvers.

    python scripts/shift_discrepancy.py --mus 0.1 1 10 --steps 100 1000
"""

from dataclasses import dataclass, field, replace

import numpy as np
from _common import parse_into, print_table

from maxreg.experiments import robin_beta, spectral_data
from maxreg.form import diag_perturbed
from maxreg.robin import RobinProblem, assemble
from maxreg.solver import TimeGrid, h_norms, shift_transform, solve


@dataclass
class Config:
    mus: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    steps: list = field(default_factory=lambda: [100, 1000])
    family: str = "robin"  # robin or diag


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    if cfg.family == "robin":
        F = assemble(RobinProblem(16, robin_beta("holder", 1.0, 0.5, 1.0, 0.6), alpha=0.6, c=1.0))
    else:
        F = diag_perturbed(16, 0.6, 0.5, 1.0)
    G, S = F.triple.gram_H, F.matrix_at
    rows = []
    for mu in cfg.mus:
        Fs = replace(F, matrix_at=lambda t, mu=mu: S(t) + mu * G)
        for n in cfg.steps:
            g = TimeGrid(1.0, n)
            f, u0 = spectral_data(F, g, np.ones(F.triple.dim), np.zeros(F.triple.dim))
            fs = f.scaled(np.exp(-mu * g.nodes))
            row = {"mu": float(mu), "n_steps": n, "mu_dt": mu * g.dt}
            for method in ("stepping", "representation"):
                d = solve(F, f, u0, method, g)
                b = shift_transform(solve(Fs, fs, u0, method, g), mu, "backward")
                row[method] = float(h_norms(F.triple, b.u.values - d.u.values).max())
            rows.append(row)
    print_table(rows)


if __name__ == "__main__":
    main()

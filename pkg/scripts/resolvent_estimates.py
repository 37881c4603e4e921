"""Empirical resolvent-estimate constants on the Robin problem, with a lambda-refinement check.

    python scripts/resolvent_estimates.py --n-cells 16 32 --ells 0 0.5 1
"""

from dataclasses import dataclass, field

from _common import parse_into, print_table

from maxreg.experiments import robin_beta
from maxreg.robin import RobinProblem, assemble
from maxreg.sectorial import lambda_samples, make_snapshot, verify_resolvent_estimates


@dataclass
class Config:
    n_cells: list = field(default_factory=lambda: [16, 32])
    ells: list = field(default_factory=lambda: [0.0, 0.5, 1.0])
    per_decade: int = 8
    refine: int = 4
    t: float = 0.5
    alpha: float = 0.5


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    rows = []
    for n in cfg.n_cells:
        F = assemble(RobinProblem(n, robin_beta("holder", 1.0, 1.0, 1.0, cfg.alpha), alpha=cfg.alpha, c=1.0))
        P = make_snapshot(F.triple, F.S(cfg.t))
        coarse = lambda_samples(P, per_decade=cfg.per_decade)
        fine = lambda_samples(P, per_decade=cfg.refine * cfg.per_decade)
        for ell in cfg.ells:
            a = verify_resolvent_estimates(P, ell, coarse).constants
            b = verify_resolvent_estimates(P, ell, fine).constants
            for lab in a:
                rows.append({"n_cells": n, "ell": float(ell), "estimate": lab, "coarse": a[lab], "fine": b[lab],
                             "rel_change": abs(b[lab] / a[lab] - 1)})
    print_table(rows)


if __name__ == "__main__":
    main()

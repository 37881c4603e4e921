"""Contour inverse square root and semigroup against dense oracles on random matrices.

    python scripts/fractional_power_check.py --n-hpd 20 --n-sectorial 10 --max-dim 64
"""

import time
from dataclasses import dataclass

import numpy as np
from _common import parse_into, print_table

from maxreg.sectorial import inv_sqrt, inv_sqrt_oracle, matrix_snapshot, semigroup_apply, semigroup_oracle


@dataclass
class Config:
    n_hpd: int = 20
    n_sectorial: int = 10
    max_dim: int = 64
    max_arg: float = 1.0
    seed: int = 2024


def random_hpd(rng, n, cond):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * np.geomspace(1.0, cond, n)) @ Q.T


def random_sectorial(rng, n, max_arg):
    """Real diagonalizable matrix with spectrum in the sector |arg z| <= max_arg."""
    D = np.zeros((n, n))
    mods = np.geomspace(1.0, 50.0, n)
    for k in range(0, n - 1, 2):
        z = mods[k] * np.exp(1j * rng.uniform(0, max_arg))
        D[k:k + 2, k:k + 2] = [[z.real, z.imag], [-z.imag, z.real]]
    if n % 2:
        D[-1, -1] = mods[-1]
    X = np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)
    return X @ D @ np.linalg.inv(X)


def main(argv=None):
    cfg = parse_into(Config, __doc__.splitlines()[0], argv)
    rng = np.random.default_rng(cfg.seed)
    mats = [("hpd", random_hpd(rng, int(rng.integers(1, cfg.max_dim + 1)), 10 ** rng.uniform(1, 3)))
            for _ in range(cfg.n_hpd)]
    mats += [("sectorial", random_sectorial(rng, int(rng.integers(2, cfg.max_dim + 1)), cfg.max_arg))
             for _ in range(cfg.n_sectorial)]
    rows = []
    start = time.perf_counter()
    for kind, A in mats:
        P = matrix_snapshot(A)
        R = inv_sqrt(P)
        Ainv = np.linalg.inv(A)
        O = inv_sqrt_oracle(A)
        v = rng.standard_normal(A.shape[0])
        sg = max(np.linalg.norm(semigroup_apply(P, t, v) - semigroup_oracle(P, t) @ v)
                 / np.linalg.norm(semigroup_oracle(P, t) @ v) for t in (0.01, 0.1, 1.0))
        rows.append({"kind": kind, "n": A.shape[0],
                     "identity_err": np.linalg.norm(R @ R - Ainv, 2) / np.linalg.norm(Ainv, 2),
                     "oracle_err": np.linalg.norm(R - O, 2) / np.linalg.norm(O, 2), "semigroup_err": sg})
    print_table(rows)
    print(f"total {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()

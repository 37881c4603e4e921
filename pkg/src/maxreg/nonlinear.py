"""Semilinear Robin problem ``u' - u'' + beta1(u) u' + beta0(u) u = f`` by damped Picard iteration.

The map ``T`` freezes the coefficients at a given ``w`` and solves the resulting
linear non-autonomous problem; fixed points of ``T`` solve the nonlinear one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import NotConverged
from .form import NonAutonomousForm
from .robin import RobinProblem, assemble
from .solver import GridFunction, SolveReport, h_norms, l2_time, solve

log = logging.getLogger(__name__)


def beta_family(name, amplitude=1.0, scale=1.0):
    """``(function, sup bound)`` for the named bounded coefficient."""
    a, s = float(amplitude), float(scale)
    if name == "zero":
        return (lambda x: np.zeros_like(x)), 0.0
    if name == "tanh":
        return (lambda x: a * np.tanh(x / s)), abs(a)
    if name == "bounded_poly":
        return (lambda x: a * (x / s) ** 2 / (1.0 + (x / s) ** 2)), abs(a)
    raise ValueError(f"unknown coefficient family {name!r}")


_ZERO, _ = beta_family("zero")


@dataclass(frozen=True)
class NonlinearProblem:
    base: RobinProblem
    beta0: Callable = _ZERO
    beta1: Callable = _ZERO
    beta0_sup: float = 0.0
    beta1_sup: float = 0.0
    damping: float = 0.5
    tol: float = 1e-8
    max_outer: int = 50
    scheme: str = "crank_nicolson"

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        probe = np.linspace(-50.0, 50.0, 2001)
        for fn, sup, name in ((self.beta0, self.beta0_sup, "beta0"), (self.beta1, self.beta1_sup, "beta1")):
            if np.abs(fn(probe)).max() > sup * (1 + 1e-12) + 1e-300:
                raise ValueError(f"{name} exceeds its declared bound {sup}")

    @property
    def extra_shift(self):
        """Mass multiple keeping the perturbed form coercive (constant 1/4) for every ``w``."""
        return self.beta0_sup + self.beta1_sup ** 2


def convection_matrix(coef):
    """``int beta1 u' conj(v)`` with one coefficient per element (rows = test functions)."""
    n_cells = len(coef)
    C = np.zeros((n_cells + 1, n_cells + 1))
    e = np.arange(n_cells)
    half = 0.5 * np.asarray(coef, dtype=float)
    for r in (0, 1):
        np.add.at(C, (e + r, e), -half)
        np.add.at(C, (e + r, e + 1), half)
    return C


def reaction_matrix(coef):
    """``int beta0 u conj(v)`` with one coefficient per element."""
    n_cells = len(coef)
    h = 1.0 / n_cells
    R = np.zeros((n_cells + 1, n_cells + 1))
    e = np.arange(n_cells)
    c = np.asarray(coef, dtype=float) * h / 6
    np.add.at(R, (e, e), 2 * c)
    np.add.at(R, (e + 1, e + 1), 2 * c)
    np.add.at(R, (e, e + 1), c)
    np.add.at(R, (e + 1, e), c)
    return R


def _interp_time(w: GridFunction, t):
    ts = w.grid.nodes
    k = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2))
    lam = (t - ts[k]) / w.grid.dt
    return (1 - lam) * w.values[k] + lam * w.values[k + 1]


def linearized_form(P: NonlinearProblem, w: GridFunction) -> NonAutonomousForm:
    """Base Robin form plus convection/reaction with coefficients frozen at ``w``."""
    F = assemble(P.base)
    extra = P.extra_shift
    M = F.triple.gram_H
    S0 = F.matrix_at

    def matrix_at(t):
        wt = np.real(_interp_time(w, t))
        mid = 0.5 * (wt[:-1] + wt[1:])
        return S0(t) + convection_matrix(P.beta1(mid)) + reaction_matrix(P.beta0(mid)) + extra * M

    return replace(F, matrix_at=matrix_at, shift=F.shift + extra, name=F.name + "-linearized")


@dataclass
class FixedPointResult:
    u: SolveReport
    outer_iterations: int
    residual_history: list
    damping: float
    mr_constants: list = field(default_factory=list)


def apply_map(P: NonlinearProblem, w: GridFunction, f: GridFunction, u0) -> SolveReport:
    """``T(w)``: solution of the problem linearized at ``w``."""
    return solve(linearized_form(P, w), f, u0, method="stepping", grid=w.grid, scheme=P.scheme)


def _l2l2(triple, grid, values):
    return l2_time(grid, h_norms(triple, values))


def solve_fixed_point(P: NonlinearProblem, f: GridFunction, u0) -> FixedPointResult:
    """Damped Picard ``w <- (1 - theta) w + theta T(w)`` starting from ``w = u0``.

    Stops when ``|T(w) - w| <= tol (1 + |w|)`` in ``L2(0,T;L2)`` and returns
    ``T(w)``; when both coefficients vanish identically ``T`` is constant and
    its first value is returned.  If the requested damping fails, smaller
    values from ``{1, 0.5, 0.25}`` are tried before giving up with
    :class:`NotConverged`.
    """
    grid = f.grid
    u0 = np.asarray(u0, dtype=float)
    triple = assemble(P.base).triple
    dampings = [P.damping] + [d for d in (1.0, 0.5, 0.25) if d < P.damping]
    last = None
    for theta in dampings:
        w = GridFunction(grid, np.tile(u0, (grid.n_steps + 1, 1)))
        history, mrs = [], []
        for it in range(1, P.max_outer + 1):
            rep = apply_map(P, w, f, u0)
            mrs.append(rep.mr_constant)
            if P.beta0_sup == 0.0 and P.beta1_sup == 0.0:
                # T does not depend on w: its value is the fixed point
                return FixedPointResult(rep, it, [0.0], theta, mrs)
            res = _l2l2(triple, grid, rep.u.values - w.values)
            history.append(res)
            if res <= P.tol * (1.0 + _l2l2(triple, grid, w.values)):
                return FixedPointResult(rep, it, history, theta, mrs)
            w = GridFunction(grid, (1 - theta) * w.values + theta * rep.u.values)
        log.info("damping %g: residual %.3e after %d iterations", theta, history[-1], P.max_outer)
        last = history[-1]
    raise NotConverged(f"fixed-point residual {last:.3e} above tol after damping sweep {dampings}")

"""Heat equation on (0, 1) with time-dependent Robin conditions, P1 finite elements.

The weak form is

    a(t; u, v) = int u' conj(v') dx + (B(t) (u(0), u(1))) . conj((v(0), v(1))),

with ``B(t)`` a real 2x2 matrix (diagonal in the usual case).  A multiple of
the mass matrix is added so that the form is coercive with ``delta >= 1/2``;
solvers remove it again through the exponential shift.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import BoundaryZero, InvalidHolder
from .form import ModulusOfContinuity, NonAutonomousForm, declared_constants, sample_pairs
from .sectorial import make_snapshot
from .solver import GridFunction, TimeGrid, h_norms, l2_time, solve
from .triple import build_triple

GAMMA_EPS = 0.05
GAMMA_CAP = 0.95


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution with its forcing and the boundary coefficients it induces."""

    name: str
    u: Callable  # (t, x) -> values
    f: Callable  # (t, x) -> values
    beta: Optional[Callable] = None  # t -> (beta0, beta1); None keeps the problem's own


@dataclass(frozen=True)
class RobinProblem:
    n_cells: int = 16
    beta: Callable = lambda t: (0.0, 0.0)
    alpha: float = 1.0
    c: float = 0.0
    horizon: float = 1.0
    exact: Optional[ManufacturedSolution] = None
    name: str = "robin"

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("n_cells must be at least 2")
        if not self.alpha > 0.25:
            raise InvalidHolder(f"alpha={self.alpha} must exceed 1/4")
        if self.alpha > 1:
            raise InvalidHolder(f"alpha={self.alpha} must not exceed 1")

    @property
    def h(self):
        return 1.0 / self.n_cells

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    @property
    def gamma(self):
        return min(2 * self.alpha - GAMMA_EPS, GAMMA_CAP)

    def boundary_matrix(self, t):
        b = np.asarray(self.beta(float(t)), dtype=float)
        return np.diag(b) if b.shape == (2,) else b


# assembly ----------------------------------------------------------------------


def mass_matrix(n_cells):
    h = 1.0 / n_cells
    n = n_cells + 1
    M = np.zeros((n, n))
    loc = h / 6 * np.array([[2.0, 1.0], [1.0, 2.0]])
    for e in range(n_cells):
        M[e:e + 2, e:e + 2] += loc
    return M


def stiffness_matrix(n_cells):
    h = 1.0 / n_cells
    n = n_cells + 1
    K = np.zeros((n, n))
    loc = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    for e in range(n_cells):
        K[e:e + 2, e:e + 2] += loc
    return K


def trace_matrix(n_cells):
    """``E`` with ``E^T u = (u(0), u(1))``."""
    E = np.zeros((n_cells + 1, 2))
    E[0, 0] = E[-1, 1] = 1.0
    return E


def coercivity_shift(b_sup):
    """Mass multiple making ``a + mu (.|.)_H`` coercive with constant 1/2 when ``|B| <= b_sup``.

    From ``|u(0)|^2 + |u(1)|^2 <= eps |u'|^2 + (2 + 2/eps) |u|^2`` with ``eps = 1/(2 b)``.
    """
    return 0.5 + 2.0 * b_sup + 8.0 * b_sup ** 2


def boundary_sup(P: RobinProblem, n_samples=257):
    return max(np.linalg.norm(P.boundary_matrix(t), 2) for t in np.linspace(0, P.horizon, n_samples))


def trace_norm(triple, E, ell):
    """Norm of ``u -> E^T u`` from the order-``ell`` scale space into C^2."""
    return float(np.linalg.norm(E.T @ triple.eigvecs * triple.weights(-0.5 * ell)[None, :], 2))


def holder_ratio(P: RobinProblem, n_time_samples=9):
    """Worst ``|B(t) - B(s)| / (c |t - s|^alpha)`` on the dyadic sample pairs."""
    worst = 0.0
    for t, s in sample_pairs(P.horizon, n_time_samples):
        Bt, Bs = P.boundary_matrix(t), P.boundary_matrix(s)
        d = np.linalg.norm(Bt - Bs, 2)
        if d <= 1e-12 * (1.0 + np.abs(Bt).max()):
            continue
        bound = P.c * abs(t - s) ** P.alpha
        worst = max(worst, d / bound if bound > 0 else np.inf)
    return worst


def assemble(P: RobinProblem) -> NonAutonomousForm:
    M = mass_matrix(P.n_cells)
    K = stiffness_matrix(P.n_cells)
    E = trace_matrix(P.n_cells)
    triple = build_triple(M, M + K)
    mu = coercivity_shift(boundary_sup(P))
    if holder_ratio(P) > 1 + 1e-9:
        warnings.warn("boundary coefficients violate the declared Hoelder bound on samples")

    def matrix_at(t):
        return K + E @ P.boundary_matrix(t) @ E.T + mu * M

    gamma = P.gamma
    c_omega = P.c * trace_norm(triple, E, 1.0) * trace_norm(triple, E, gamma)
    modulus = ModulusOfContinuity("holder", P.alpha, c_omega * (1 + 1e-9), gamma)
    M_obs, d_obs = declared_constants(triple, matrix_at, P.horizon, n=65)
    return NonAutonomousForm(triple, matrix_at, P.horizon, M_obs * (1 + 1e-9), d_obs * (1 - 1e-9),
                             modulus, shift=mu, name=P.name)


def snapshot(P: RobinProblem, t=0.0):
    """Frozen shifted operator at time ``t``."""
    F = assemble(P)
    return make_snapshot(F.triple, F.S(t))


# manufactured solutions ---------------------------------------------------------


def _g(x, phi0=0.0):
    return 2.0 + np.sin(np.pi * (x - 0.5) / 2 + phi0)


def _dg(x, phi0=0.0):
    return np.pi / 2 * np.cos(np.pi * (x - 0.5) / 2 + phi0)


def _d2g(x, phi0=0.0):
    return -(np.pi / 2) ** 2 * np.sin(np.pi * (x - 0.5) / 2 + phi0)


def _k(x):
    return 1.0 + x - x ** 2


def _robin_beta(u, ux):
    """``beta`` with ``d_nu u + beta u = 0`` at both ends (outward normal)."""

    def beta(t):
        u0, u1 = u(t, 0.0), u(t, 1.0)
        if min(abs(u0), abs(u1)) < 1e-12:
            raise BoundaryZero(f"exact solution vanishes at the boundary at t={t}")
        return (ux(t, 0.0) / u0, -ux(t, 1.0) / u1)

    return beta


def manufactured_solution(variant) -> ManufacturedSolution:
    """Built-in exact solutions.

    ``"separable"``: ``e^{-t} g(x)`` (constant coefficients); ``"growing"``:
    ``g(x) + t^2 k(x)`` (time-dependent coefficients); ``"rough_time"``:
    ``g(x) + t^{3/2} k(x)``; ``"neumann"``: ``e^{-pi^2 t} cos(pi x)``;
    ``"zero"``: ``u = 0``.
    """
    if variant == "separable":
        u = lambda t, x: np.exp(-t) * _g(x)
        ux = lambda t, x: np.exp(-t) * _dg(x)
        f = lambda t, x: np.exp(-t) * (-_g(x) - _d2g(x))
        return ManufacturedSolution(variant, u, f, _robin_beta(u, ux))
    if variant == "growing":
        u = lambda t, x: _g(x) + t ** 2 * _k(x)
        ux = lambda t, x: _dg(x) + t ** 2 * (1.0 - 2.0 * x)
        f = lambda t, x: 2.0 * t * _k(x) - _d2g(x) + 2.0 * t ** 2
        return ManufacturedSolution(variant, u, f, _robin_beta(u, ux))
    if variant == "rough_time":
        # u_t ~ t^{1/2}: limits second-order time stepping to order 3/2
        u = lambda t, x: _g(x) + t ** 1.5 * _k(x)
        ux = lambda t, x: _dg(x) + t ** 1.5 * (1.0 - 2.0 * x)
        f = lambda t, x: 1.5 * np.sqrt(t) * _k(x) - _d2g(x) + 2.0 * t ** 1.5
        return ManufacturedSolution(variant, u, f, _robin_beta(u, ux))
    if variant == "neumann":
        u = lambda t, x: np.exp(-np.pi ** 2 * t) * np.cos(np.pi * x)
        f = lambda t, x: np.zeros_like(np.asarray(x, dtype=float))
        return ManufacturedSolution(variant, u, f, lambda t: (0.0, 0.0))
    if variant == "zero":
        z = lambda t, x: np.zeros_like(np.asarray(x, dtype=float))
        return ManufacturedSolution(variant, z, z, None)
    raise ValueError(f"unknown manufactured variant {variant!r}")


def _lipschitz(beta, horizon, n=2001):
    ts = np.linspace(0.0, horizon, n)
    b = np.array([beta(t) for t in ts])
    lip = float(np.abs(np.diff(b, axis=0)).max() / (ts[1] - ts[0]))
    # constant coefficients up to rounding
    return 0.0 if lip < 1e-9 * (1.0 + np.abs(b).max()) else lip


def manufactured_problem(variant="separable", n_cells=16, horizon=1.0, beta=None, alpha=0.5, c=1.0):
    """Robin problem whose boundary coefficients are induced by a manufactured solution.

    For ``"zero"`` the coefficients ``beta`` (with Hoelder constants ``alpha``, ``c``)
    are free; the default is ``1 + t^{1/2}`` at both ends.
    """
    ex = manufactured_solution(variant)
    if ex.beta is None:
        beta = beta or (lambda t: (1.0 + np.sqrt(t), 1.0 + np.sqrt(t)))
        return RobinProblem(n_cells, beta, alpha, c, horizon, ex, name=f"robin-{variant}")
    ex.beta(0.0)
    # smooth in t: Lipschitz modulus with a margin
    lip = _lipschitz(ex.beta, horizon)
    return RobinProblem(n_cells, ex.beta, 1.0, 1.01 * lip, horizon, ex, name=f"robin-{variant}")


def manufactured_case(P: RobinProblem, grid: TimeGrid):
    """Forcing, initial value and exact nodal values on ``grid``."""
    if P.exact is None:
        raise ValueError("problem carries no manufactured solution")
    x = P.nodes
    ts = grid.nodes
    u_ex = np.array([P.exact.u(t, x) for t in ts], dtype=float)
    f = np.array([P.exact.f(t, x) for t in ts], dtype=float)
    return {"f": GridFunction(grid, f), "u0": u_ex[0].copy(), "u_exact": GridFunction(grid, u_ex)}


def solve_problem(P: RobinProblem, grid: TimeGrid, f=None, u0=None, solver="stepping", scheme="crank_nicolson", **kw):
    """Solve the (unshifted) Robin problem; ``f``/``u0`` default to the manufactured data."""
    F = assemble(P)
    if f is None or u0 is None:
        case = manufactured_case(P, grid)
        f = case["f"] if f is None else f
        u0 = case["u0"] if u0 is None else u0
    if solver == "stepping":
        return solve(F, f, u0, method="stepping", grid=grid, scheme=scheme)
    return solve(F, f, u0, method="representation", grid=grid, **kw)


def convergence_study(P: RobinProblem, levels, scheme="crank_nicolson", solver="stepping", **kw):
    """Errors against the nodal interpolant of the exact solution, in the mass norm.

    ``levels`` is a list of ``(n_cells, n_steps)``.  Returns one dict per level
    with ``L2L2_error``, ``LinfL2_error`` and the observed order (log2 of the
    ratio to the previous level's L2L2 error; NaN on the first level).
    """
    rows = []
    prev = None
    for n_cells, n_steps in levels:
        Pk = replace(P, n_cells=int(n_cells))
        grid = TimeGrid(P.horizon, int(n_steps))
        case = manufactured_case(Pk, grid)
        rep = solve_problem(Pk, grid, case["f"], case["u0"], solver=solver, scheme=scheme, **kw)
        err = h_norms(rep.form.triple, rep.u.values - case["u_exact"].values)
        e2 = l2_time(grid, err)
        einf = float(err.max())
        if prev is None:
            order = float("nan")
        elif e2 == 0.0 and prev == 0.0:
            order = float("nan")
        else:
            order = float(np.log2(prev / e2))
        rows.append({"n_cells": int(n_cells), "n_steps": int(n_steps), "L2L2_error": e2,
                     "LinfL2_error": einf, "observed_order": order})
        prev = e2
    return rows
